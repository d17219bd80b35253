#include "sqmz/estimation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sqmz/errors.hpp"

namespace sqmz {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kBisectionTol = 1e-12;
constexpr int kBisectionMaxIter = 200;
constexpr double kDerivativeFloor = 1e-14;

void require_trials(std::int64_t n) {
  if (n < 1) {
    throw ArgumentError("trial count must be at least 1");
  }
}

void require_fraction(double f) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw ArgumentError("observed fraction must lie in [0, 1]");
  }
}

// Inverts a function that is non-increasing on [lo, hi].
template <typename F>
EstimationResult invert_decreasing(F&& prob, double observed, double lo, double hi, Target target) {
  require_fraction(observed);
  EstimationResult result;
  result.observed_fraction = observed;
  result.target = target;

  const double top = prob(lo);
  const double bottom = prob(hi);
  if (observed > top) {
    result.estimate = lo;
    result.status = EstimateStatus::clamped_low;
    return result;
  }
  if (observed < bottom) {
    result.estimate = hi;
    result.status = EstimateStatus::clamped_high;
    return result;
  }
  if (observed == top) {
    result.estimate = lo;
    return result;
  }
  for (int i = 0; i < kBisectionMaxIter && hi - lo > kBisectionTol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (prob(mid) > observed) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.estimate = 0.5 * (lo + hi);
  return result;
}

}  // namespace

std::string_view to_string(Target target) {
  return target == Target::beta ? "beta" : "phi-minus";
}

Target target_from_string(std::string_view name) {
  if (name == "beta") {
    return Target::beta;
  }
  if (name == "phi-minus" || name == "phi_minus") {
    return Target::phi_minus;
  }
  throw ArgumentError("unknown target '" + std::string(name) + "' (expected beta or phi-minus)");
}

std::string_view to_string(EstimateStatus status) {
  switch (status) {
    case EstimateStatus::interior:
      return "interior";
    case EstimateStatus::clamped_low:
      return "clamped_low";
    case EstimateStatus::clamped_high:
      return "clamped_high";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

TrialStream::TrialStream(StreamId id) : engine_(splitmix64(splitmix64(id.master_seed) ^ id.index)) {}

double TrialStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

TrialBatch simulate_trials(double p, std::int64_t n, StreamId stream) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ArgumentError("success probability must lie in [0, 1]");
  }
  require_trials(n);
  TrialStream rng(stream);
  std::int64_t successes = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    if (rng.uniform() < p) {
      ++successes;
    }
  }
  return TrialBatch{n, successes, stream};
}

EstimationResult invert_beta(double observed_fraction, double phi_minus, double mean_photons, double eta) {
  auto prob = [&](double beta) { return detection_probability_closed(beta, phi_minus, mean_photons, eta); };
  return invert_decreasing(prob, observed_fraction, 0.0, kHalfPi, Target::beta);
}

double phi_minus_peak(double beta, double mean_photons, double eta) {
  if (!(mean_photons > 0.0)) {
    return 0.0;
  }
  // With t = sin^2(phi_minus) the bracket is quadratic in t with leading
  // coefficient eta~ N^2 and minimum at t* = (2 sin^2(beta)(1 + N) - 1) / (eta~ N).
  double sb2 = std::sin(beta);
  sb2 *= sb2;
  const double t = (2.0 * sb2 * (1.0 + mean_photons) - 1.0) / (eta_tilde(eta) * mean_photons);
  if (t <= 0.0) {
    return 0.0;
  }
  if (t >= 1.0) {
    return kHalfPi;
  }
  return std::asin(std::sqrt(t));
}

EstimationResult invert_phi_minus(double observed_fraction, double beta, double mean_photons, double eta) {
  auto prob = [&](double phi) { return detection_probability_closed(beta, phi, mean_photons, eta); };
  return invert_decreasing(prob, observed_fraction, phi_minus_peak(beta, mean_photons, eta), kHalfPi,
                           Target::phi_minus);
}

EstimationResult mle_beta(const TrialBatch& batch, double phi_minus, double mean_photons, double eta) {
  require_trials(batch.n);
  return invert_beta(batch.fraction(), phi_minus, mean_photons, eta);
}

EstimationResult mle_phi_minus(const TrialBatch& batch, double beta, double mean_photons, double eta) {
  require_trials(batch.n);
  return invert_phi_minus(batch.fraction(), beta, mean_photons, eta);
}

double probability_derivative(double beta, double phi_minus, double mean_photons, double eta, Target target,
                              Channel channel) {
  const double n = mean_photons;
  const double et = eta_tilde(eta);
  const ProbabilityPair pp = no_click_probability(beta, phi_minus, n, eta, channel);
  // dP/dx = -(1/2) (1 + et bracket)^{-3/2} et d(bracket)/dx, and (1 + et bracket)^{-1/2} = P.
  const double prefactor = -0.5 * et * pp.p * pp.p * pp.p;

  double c2 = std::cos(phi_minus);
  double s2 = std::sin(phi_minus);
  c2 *= c2;
  s2 *= s2;
  double sb2 = std::sin(beta);
  sb2 *= sb2;
  const bool second = channel == Channel::two;

  double d_bracket = 0.0;
  if (target == Target::beta) {
    const double weight = second ? s2 : c2;
    d_bracket = 4.0 * weight * std::sin(2.0 * beta) * n * (1.0 + n);
  } else {
    const double sin2phi = std::sin(2.0 * phi_minus);
    if (second) {
      d_bracket = -2.0 * sin2phi * (n + et * n * n * c2 - 2.0 * sb2 * n * (1.0 + n));
    } else {
      d_bracket = 2.0 * sin2phi * (n + et * n * n * s2 - 2.0 * sb2 * n * (1.0 + n));
    }
  }
  return prefactor * d_bracket;
}

double variance_error_propagation(double beta, double phi_minus, double mean_photons, double eta, std::int64_t n,
                                  Target target) {
  require_trials(n);
  const double d = probability_derivative(beta, phi_minus, mean_photons, eta, target);
  if (std::abs(d) < kDerivativeFloor) {
    throw SingularityError("error propagation singular at probability extremum");
  }
  const ProbabilityPair pp = no_click_probability(beta, phi_minus, mean_photons, eta);
  return pp.p * pp.complement / (static_cast<double>(n) * d * d);
}

double error_propagation_precision(double beta, double phi_minus, double mean_photons, double eta, std::int64_t n,
                                   Target target) {
  require_trials(n);
  const ProbabilityPair pp = no_click_probability(beta, phi_minus, mean_photons, eta);
  if (!(pp.complement > 0.0)) {
    throw SingularityError("error propagation singular at probability peak");
  }
  const double d = probability_derivative(beta, phi_minus, mean_photons, eta, target);
  return static_cast<double>(n) * d * d / (pp.p * pp.complement);
}

double heisenberg_variance(double mean_photons, double eta, std::int64_t n) {
  require_trials(n);
  return 1.0 / (32.0 * eta_tilde(eta) * static_cast<double>(n) * mean_photons * mean_photons);
}

double sql_variance(double mean_photons, double eta, std::int64_t n) {
  require_trials(n);
  return 1.0 / (4.0 * eta_tilde(eta) * static_cast<double>(n) * mean_photons);
}

}  // namespace sqmz
