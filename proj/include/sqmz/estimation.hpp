#pragma once

// Maximum-likelihood inversion of the no-click probability, Bernoulli trial
// simulation and error-propagation variances.

#include <cstdint>
#include <random>
#include <string_view>

#include "sqmz/protocol.hpp"

namespace sqmz {

enum class Target { beta, phi_minus };

std::string_view to_string(Target target);
/// Accepts "beta", "phi-minus" and "phi_minus".
Target target_from_string(std::string_view name);

/// Identifies an independent random stream: (master seed, experiment index).
struct StreamId {
  std::uint64_t master_seed = 0;
  std::uint64_t index = 0;
};

/// Deterministic generator for one stream. The engine seed is a SplitMix64
/// hash of the stream id, so streams are reproducible and independent of the
/// order in which they are consumed.
class TrialStream {
 public:
  explicit TrialStream(StreamId id);

  /// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
  double uniform();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct TrialBatch {
  std::int64_t n = 0;
  /// Number of no-click outcomes.
  std::int64_t successes = 0;
  StreamId stream;

  double fraction() const { return static_cast<double>(successes) / static_cast<double>(n); }
};

/// n Bernoulli(p) trials drawn from `stream`. Throws ArgumentError unless
/// 0 <= p <= 1 and n >= 1.
TrialBatch simulate_trials(double p, std::int64_t n, StreamId stream);

enum class EstimateStatus { interior, clamped_low, clamped_high };

std::string_view to_string(EstimateStatus status);

struct EstimationResult {
  double estimate = 0.0;
  double observed_fraction = 0.0;
  EstimateStatus status = EstimateStatus::interior;
  Target target = Target::beta;
};

/// Solves P(beta, phi_minus) = observed_fraction for beta in [0, pi/2].
EstimationResult invert_beta(double observed_fraction, double phi_minus, double mean_photons, double eta);

/// Solves P(beta, phi_minus) = observed_fraction for phi_minus on the
/// decreasing branch [phi_peak, pi/2], where phi_peak maximizes P at this beta
/// (phi_peak = 0 whenever cos(2 beta) >= 0).
EstimationResult invert_phi_minus(double observed_fraction, double beta, double mean_photons, double eta);

/// Location of the maximum of P(beta, .) on [0, pi/2].
double phi_minus_peak(double beta, double mean_photons, double eta);

EstimationResult mle_beta(const TrialBatch& batch, double phi_minus, double mean_photons, double eta);
EstimationResult mle_phi_minus(const TrialBatch& batch, double beta, double mean_photons, double eta);

/// Analytic partial derivative of the closed-form probability.
double probability_derivative(double beta, double phi_minus, double mean_photons, double eta, Target target,
                              Channel channel = Channel::one);

/// P (1 - P) / (n (dP/d target)^2).
/// Throws SingularityError when |dP/d target| < 1e-14 (probability extremum).
double variance_error_propagation(double beta, double phi_minus, double mean_photons, double eta, std::int64_t n,
                                  Target target);

/// Reciprocal of variance_error_propagation, n (dP/d target)^2 / (P (1 - P)).
/// Finite wherever P < 1; throws SingularityError at the peaks, where P = 1.
double error_propagation_precision(double beta, double phi_minus, double mean_photons, double eta, std::int64_t n,
                                   Target target);

/// 1 / (32 eta (2 - eta) n N^2).
double heisenberg_variance(double mean_photons, double eta, std::int64_t n);

/// 1 / (4 eta (2 - eta) n N).
double sql_variance(double mean_photons, double eta, std::int64_t n);

}  // namespace sqmz
