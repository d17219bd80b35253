#pragma once

// Parameter sweeps and Monte Carlo campaigns built on the protocol and
// estimation layers. Every routine returns in-memory tables whose ordering is
// fixed by node or experiment index, independent of the thread count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqmz/estimation.hpp"
#include "sqmz/protocol.hpp"

namespace sqmz {

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware concurrency).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Inclusive, evenly spaced axis. A single-node axis requires lo == hi.
struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  void validate(const char* name) const;
  double node(std::size_t i) const;
};

struct GridSpec {
  AxisRange beta;
  AxisRange phi_minus;

  void validate() const;
  std::size_t size() const { return beta.count * phi_minus.count; }
};

struct SurfaceNode {
  double beta = 0.0;
  double phi_minus = 0.0;
  /// NaN when `singular` is set.
  double value = 0.0;
  bool singular = false;
};

/// Closed-form P on every node, beta-major (phi_minus varies fastest).
std::vector<SurfaceNode> probability_surface(const GridSpec& grid, double mean_photons, double eta,
                                             Channel channel = Channel::one, unsigned threads = 1);

/// 1 / (N^2 Var[beta]) or 1 / (N Var[phi_minus]) from error propagation.
/// Nodes within 1e-9 of a peak (h pi, k pi) are flagged singular.
std::vector<SurfaceNode> rescaled_variance_surface(const GridSpec& grid, double mean_photons, double eta,
                                                   std::int64_t n, Target target, unsigned threads = 1);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// log(y) - (intercept + slope log(x)) per point.
  std::vector<double> residuals;
  double rms_residual = 0.0;
};

/// Ordinary least squares of log(y) on log(x). Requires >= 2 positive points.
LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y);

/// 10^(lo_exp + i / per_decade) for i = 0 .. (hi_exp - lo_exp) * per_decade.
std::vector<double> log_spaced(double lo_exp, double hi_exp, int per_decade);

enum class OffsetRule { c_over_n, c_over_sqrt_n };

struct DeltaRule {
  OffsetRule kind = OffsetRule::c_over_n;
  double coefficient = 0.5;

  double offset(double mean_photons) const;
};

struct ScalingStudy {
  std::vector<double> mean_photons;
  double eta = 1.0;
  double p0 = 0.9;
  DeltaRule delta_rule;

  void validate() const;
};

struct DiameterRow {
  double mean_photons = 0.0;
  std::optional<LevelCurveDiameters> diameters;
  /// Set when the closed forms are out of domain for this row.
  std::string error;
};

struct DiameterScaling {
  std::vector<DiameterRow> rows;
  /// Fits over the valid rows; empty when fewer than two rows are valid.
  std::optional<LogLogFit> beta_fit;
  std::optional<LogLogFit> phi_fit;
};

DiameterScaling diameter_scaling(const ScalingStudy& study);

struct VarianceRow {
  double mean_photons = 0.0;
  double offset = 0.0;
  double variance = 0.0;
  /// Heisenberg (beta) or standard-quantum-limit (phi_minus) leading term.
  double leading_term = 0.0;
  double ratio = 0.0;
};

/// Error-propagation variance at target = delta_rule.offset(N) with the other
/// parameter at zero, compared against the leading-order asymptotic term.
std::vector<VarianceRow> variance_scaling(const ScalingStudy& study, std::int64_t n, Target target);

struct CampaignSpec {
  /// Supplies N, eta and the nuisance parameter (phi_minus for a beta
  /// campaign, beta for a phi_minus campaign).
  ProtocolConfig config;
  Target target = Target::beta;
  /// True value of the target parameter, measured from the peak at 0.
  double offset = 0.01;
  std::int64_t trials = 10000;
  std::int64_t experiments = 500;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
};

struct ExperimentRecord {
  std::int64_t id = 0;
  EstimationResult result;
};

struct CampaignSummary {
  std::vector<ExperimentRecord> records;
  double true_value = 0.0;
  double nuisance = 0.0;
  /// Probability used to draw the trials (determinant form of the pipeline).
  double detection_probability = 0.0;
  double mean_estimate = 0.0;
  double sample_variance = 0.0;
  double predicted_variance = 0.0;
  double variance_ratio = 0.0;
  /// sqrt(predicted_variance / experiments).
  double standard_error = 0.0;
  std::int64_t clamped_low = 0;
  std::int64_t clamped_high = 0;
  double clamp_fraction = 0.0;
  /// More than 1% of experiments clamped.
  bool excessive_clamping = false;
  double leading_term = 0.0;
  double loss_factor = 0.0;
};

/// Predicted standard deviation of the estimator at (offset, nuisance).
double predicted_standard_deviation(const CampaignSpec& spec);

/// True when the offset sits at least 5 predicted standard deviations away
/// from the peak, so sign folding at 0 cannot bias the sample variance.
bool offset_is_safe(const CampaignSpec& spec);

/// Configuration whose physical phases realize the campaign's true parameters.
ProtocolConfig campaign_truth(const CampaignSpec& spec);

CampaignSummary mc_campaign(const CampaignSpec& spec);

}  // namespace sqmz
