#include "sqmz/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "sqmz/errors.hpp"

namespace sqmz {

namespace {

constexpr double kPeakTol = 1e-9;
constexpr double kSafeSigmas = 5.0;
constexpr double kClampWarnFraction = 0.01;

bool near_lattice(double x) {
  return std::abs(x - std::numbers::pi * std::round(x / std::numbers::pi)) < kPeakTol;
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back(work);
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

void AxisRange::validate(const char* name) const {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw ArgumentError(std::string(name) + " range must be finite");
  }
  if (count == 1) {
    if (lo != hi) {
      throw ArgumentError(std::string(name) + " axis with one node needs lo == hi");
    }
    return;
  }
  if (count < 2 || !(lo < hi)) {
    throw ArgumentError(std::string(name) + " axis needs lo < hi and at least 2 nodes");
  }
}

double AxisRange::node(std::size_t i) const {
  if (count == 1) {
    return lo;
  }
  if (i == 0) {
    return lo;
  }
  if (i + 1 == count) {
    return hi;
  }
  const auto k = static_cast<double>(i);
  const auto m = static_cast<double>(count - 1);
  // Weighted form: exact endpoints, and symmetric ranges hit 0 exactly.
  return (lo * (m - k) + hi * k) / m;
}

void GridSpec::validate() const {
  beta.validate("beta");
  phi_minus.validate("phi_minus");
}

std::vector<SurfaceNode> probability_surface(const GridSpec& grid, double mean_photons, double eta,
                                             Channel channel, unsigned threads) {
  grid.validate();
  std::vector<SurfaceNode> out(grid.size());
  parallel_for(grid.beta.count, threads, [&](std::size_t i) {
    const double b = grid.beta.node(i);
    for (std::size_t j = 0; j < grid.phi_minus.count; ++j) {
      const double f = grid.phi_minus.node(j);
      out[i * grid.phi_minus.count + j] = {b, f, detection_probability_closed(b, f, mean_photons, eta, channel)};
    }
  });
  return out;
}

std::vector<SurfaceNode> rescaled_variance_surface(const GridSpec& grid, double mean_photons, double eta,
                                                   std::int64_t n, Target target, unsigned threads) {
  grid.validate();
  if (!(mean_photons > 0.0)) {
    throw ArgumentError("mean photon number must be positive");
  }
  const double scale = target == Target::beta ? mean_photons * mean_photons : mean_photons;
  std::vector<SurfaceNode> out(grid.size());
  parallel_for(grid.beta.count, threads, [&](std::size_t i) {
    const double b = grid.beta.node(i);
    for (std::size_t j = 0; j < grid.phi_minus.count; ++j) {
      const double f = grid.phi_minus.node(j);
      SurfaceNode node{b, f, std::numeric_limits<double>::quiet_NaN(), true};
      if (!(near_lattice(b) && near_lattice(f))) {
        try {
          node.value = error_propagation_precision(b, f, mean_photons, eta, n, target) / scale;
          node.singular = false;
        } catch (const SingularityError&) {
        }
      }
      out[i * grid.phi_minus.count + j] = node;
    }
  });
  return out;
}

LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ArgumentError("log-log fit needs at least two paired points");
  }
  const std::size_t m = x.size();
  std::vector<double> lx(m);
  std::vector<double> ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw ArgumentError("log-log fit needs positive data");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw ArgumentError("log-log fit needs at least two distinct x values");
  }
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(m);
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    fit.residuals[i] = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += fit.residuals[i] * fit.residuals[i];
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(m));
  return fit;
}

std::vector<double> log_spaced(double lo_exp, double hi_exp, int per_decade) {
  if (per_decade < 1 || !(lo_exp <= hi_exp)) {
    throw ArgumentError("log range needs lo <= hi and per_decade >= 1");
  }
  const auto steps = static_cast<int>(std::llround((hi_exp - lo_exp) * per_decade));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    out.push_back(std::pow(10.0, lo_exp + static_cast<double>(i) / per_decade));
  }
  return out;
}

double DeltaRule::offset(double mean_photons) const {
  return kind == OffsetRule::c_over_n ? coefficient / mean_photons : coefficient / std::sqrt(mean_photons);
}

void ScalingStudy::validate() const {
  if (mean_photons.empty()) {
    throw ArgumentError("scaling study needs at least one N value");
  }
  for (std::size_t i = 0; i < mean_photons.size(); ++i) {
    if (!(mean_photons[i] > 0.0) || (i > 0 && !(mean_photons[i] > mean_photons[i - 1]))) {
      throw ArgumentError("N values must be positive and strictly increasing");
    }
  }
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ArgumentError("detector efficiency eta must lie in (0, 1]");
  }
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw ArgumentError("level P0 must lie in (0, 1)");
  }
  if (!(delta_rule.coefficient > 0.0)) {
    throw ArgumentError("offset coefficient must be positive");
  }
}

DiameterScaling diameter_scaling(const ScalingStudy& study) {
  study.validate();
  DiameterScaling out;
  std::vector<double> ns;
  std::vector<double> betas;
  std::vector<double> phis;
  for (double n : study.mean_photons) {
    DiameterRow row{n, std::nullopt, {}};
    try {
      row.diameters = level_curve_diameters(study.p0, n, study.eta);
      ns.push_back(n);
      betas.push_back(row.diameters->beta_star);
      phis.push_back(row.diameters->phi_star);
    } catch (const DomainError& e) {
      row.error = e.what();
    }
    out.rows.push_back(std::move(row));
  }
  if (ns.size() >= 2) {
    out.beta_fit = fit_log_log(ns, betas);
    out.phi_fit = fit_log_log(ns, phis);
  }
  return out;
}

std::vector<VarianceRow> variance_scaling(const ScalingStudy& study, std::int64_t n, Target target) {
  study.validate();
  std::vector<VarianceRow> rows;
  for (double np : study.mean_photons) {
    VarianceRow row;
    row.mean_photons = np;
    row.offset = study.delta_rule.offset(np);
    if (target == Target::beta) {
      row.variance = variance_error_propagation(row.offset, 0.0, np, study.eta, n, target);
      row.leading_term = heisenberg_variance(np, study.eta, n);
    } else {
      row.variance = variance_error_propagation(0.0, row.offset, np, study.eta, n, target);
      row.leading_term = sql_variance(np, study.eta, n);
    }
    row.ratio = row.variance / row.leading_term;
    rows.push_back(row);
  }
  return rows;
}

namespace {

void validate_campaign(const CampaignSpec& spec) {
  spec.config.validate();
  if (!(spec.config.mean_photons > 0.0)) {
    throw ArgumentError("campaign needs a positive mean photon number");
  }
  if (spec.config.anti_squeeze_channel != Channel::one) {
    throw ArgumentError("campaigns are defined for anti-squeezing on channel 1");
  }
  if (!std::isfinite(spec.offset)) {
    throw ArgumentError("offset must be finite");
  }
  if (spec.trials < 1 || spec.experiments < 2) {
    throw ArgumentError("campaign needs trials >= 1 and experiments >= 2");
  }
}

double campaign_nuisance(const CampaignSpec& spec) {
  return spec.target == Target::beta ? spec.config.phi_minus() : spec.config.beta();
}

double predicted_variance(const CampaignSpec& spec) {
  const auto& c = spec.config;
  const double nuisance = campaign_nuisance(spec);
  return spec.target == Target::beta
             ? variance_error_propagation(spec.offset, nuisance, c.mean_photons, c.eta, spec.trials, spec.target)
             : variance_error_propagation(nuisance, spec.offset, c.mean_photons, c.eta, spec.trials, spec.target);
}

}  // namespace

double predicted_standard_deviation(const CampaignSpec& spec) {
  validate_campaign(spec);
  return std::sqrt(predicted_variance(spec));
}

bool offset_is_safe(const CampaignSpec& spec) {
  try {
    return spec.offset > 0.0 && spec.offset >= kSafeSigmas * predicted_standard_deviation(spec);
  } catch (const SingularityError&) {
    return false;
  }
}

ProtocolConfig campaign_truth(const CampaignSpec& spec) {
  ProtocolConfig truth = spec.config;
  if (spec.target == Target::beta) {
    truth.theta_out = truth.phi_plus() + truth.theta_in - spec.offset;
  } else {
    const double plus = truth.phi_plus();
    truth.phi1 = plus + spec.offset;
    truth.phi2 = plus - spec.offset;
  }
  return truth;
}

CampaignSummary mc_campaign(const CampaignSpec& spec) {
  validate_campaign(spec);
  const auto& c = spec.config;
  CampaignSummary s;
  s.true_value = spec.offset;
  s.nuisance = campaign_nuisance(spec);
  s.detection_probability = detection_probability_det(build_pipeline(campaign_truth(spec)), c.eta);
  s.predicted_variance = predicted_variance(spec);
  s.leading_term = spec.target == Target::beta ? heisenberg_variance(c.mean_photons, c.eta, spec.trials)
                                               : sql_variance(c.mean_photons, c.eta, spec.trials);
  s.loss_factor = 1.0 / c.eta_tilde();

  const auto m = static_cast<std::size_t>(spec.experiments);
  s.records.resize(m);
  parallel_for(m, spec.threads, [&](std::size_t i) {
    const TrialBatch batch = simulate_trials(s.detection_probability, spec.trials, {spec.master_seed, i});
    const EstimationResult r = spec.target == Target::beta
                                   ? mle_beta(batch, s.nuisance, c.mean_photons, c.eta)
                                   : mle_phi_minus(batch, s.nuisance, c.mean_photons, c.eta);
    s.records[i] = {static_cast<std::int64_t>(i), r};
  });

  double sum = 0.0;
  for (const auto& rec : s.records) {
    sum += rec.result.estimate;
    if (rec.result.status == EstimateStatus::clamped_low) {
      ++s.clamped_low;
    } else if (rec.result.status == EstimateStatus::clamped_high) {
      ++s.clamped_high;
    }
  }
  s.mean_estimate = sum / static_cast<double>(m);
  double ss = 0.0;
  for (const auto& rec : s.records) {
    const double d = rec.result.estimate - s.mean_estimate;
    ss += d * d;
  }
  s.sample_variance = ss / static_cast<double>(m - 1);
  s.variance_ratio = s.sample_variance / s.predicted_variance;
  s.standard_error = std::sqrt(s.predicted_variance / static_cast<double>(m));
  s.clamp_fraction = static_cast<double>(s.clamped_low + s.clamped_high) / static_cast<double>(m);
  s.excessive_clamping = s.clamp_fraction > kClampWarnFraction;
  return s;
}

}  // namespace sqmz
