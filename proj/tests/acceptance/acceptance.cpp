// Acceptance suite. Prints one PASS/FAIL line per criterion.
//   acceptance                 run every criterion
//   acceptance --criterion 7   run one

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqmz/estimation.hpp"
#include "sqmz/experiments.hpp"
#include "sqmz/protocol.hpp"
#include "sqmz/verification.hpp"

namespace {

using namespace sqmz;

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool passed = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

double rel_dev(double v, double target) { return std::abs(v / target - 1.0); }

Outcome closed_vs_determinant() {
  Stopwatch sw;
  double worst = 0.0;
  std::size_t cases = 0;
  for (double n : {1.0, 4.0, 20.0}) {
    for (double eta : {0.2, 0.6, 1.0}) {
      for (Channel ch : {Channel::one, Channel::two}) {
        for (int i = 0; i <= 20; ++i) {
          for (int j = 0; j <= 20; ++j) {
            const double beta = -kPi / 2 + kPi * i / 20.0;
            const double phi = -kPi / 2 + kPi * j / 20.0;
            ProtocolConfig c;
            c.mean_photons = n;
            c.eta = eta;
            c.anti_squeeze_channel = ch;
            const double plus = 0.37;
            c.theta_in = -0.81;
            c.phi1 = plus + phi;
            c.phi2 = plus - phi;
            c.theta_out = plus + c.theta_in - beta;
            const double det = detection_probability_det(build_pipeline(c), eta);
            const double closed = detection_probability_closed(beta, phi, n, eta, ch);
            worst = std::max(worst, std::abs(det - closed));
            ++cases;
          }
        }
      }
    }
  }
  const double t = sw.seconds();
  return {worst <= 1e-12 && t < 1.0, "max |closed - det| = " + num(worst) + " (tol 1e-12) over " +
                                         std::to_string(cases) + " cases, " + num(t) + " s (limit 1 s)"};
}

Outcome group_check(const char* group, double time_limit) {
  Stopwatch sw;
  const GroupReport r = run_verification_group(group);
  const double t = sw.seconds();
  std::string detail = "max deviation " + num(r.max_deviation) + " (tol " + num(r.tolerance) + ") over " +
                       std::to_string(r.cases) + " cases, " + num(t) + " s";
  if (time_limit > 0.0) {
    detail += " (limit " + num(time_limit) + " s)";
  }
  return {r.passed && (time_limit <= 0.0 || t < time_limit), detail};
}

Outcome semi_axes_reference_form() {
  // Reference semi-axes: 1 + w (N +- sqrt(N(1+N))), w = cos^2 phi- (mode 1), sin^2 phi- (mode 2).
  std::uint64_t state = 0x5eed;
  auto uniform = [&state](double lo, double hi) {
    state = splitmix64(state);
    return lo + (hi - lo) * static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    ProtocolConfig c;
    c.mean_photons = uniform(0.1, 20.0);
    c.theta_in = uniform(-kPi, kPi);
    c.phi1 = uniform(-kPi, kPi);
    c.phi2 = uniform(-kPi, kPi);
    const PipelineState s = build_pipeline(c);
    const double n = c.mean_photons;
    const double root = std::sqrt(n * (1.0 + n));
    const double cos2 = std::pow(std::cos(c.phi_minus()), 2);
    for (Channel ch : {Channel::one, Channel::two}) {
      const double w = ch == Channel::one ? cos2 : 1.0 - cos2;
      const Eigen::Vector2d ev = 2.0 * marginal(s.sigma_mz, ch).eigenvalues();
      worst = std::max({worst, std::abs(ev(0) - (1.0 + w * (n - root))), std::abs(ev(1) - (1.0 + w * (n + root)))});
    }
  }
  return {worst <= 1e-9, "max |eig(2 marginal) - reference semi-axis| = " + num(worst) + " (tol 1e-9)"};
}

Outcome diameter_slopes() {
  ScalingStudy study;
  study.mean_photons = log_spaced(2.0, 4.0, 8);
  study.p0 = 0.9;
  study.eta = 1.0;
  const DiameterScaling d = diameter_scaling(study);
  if (!d.beta_fit || !d.phi_fit) {
    return {false, "fewer than two valid rows"};
  }
  double level_dev = 0.0;
  for (const auto& row : d.rows) {
    if (!row.diameters) {
      return {false, "row N=" + num(row.mean_photons) + " invalid: " + row.error};
    }
    level_dev = std::max(level_dev, std::abs(detection_probability_closed(row.diameters->beta_star, 0.0,
                                                                          row.mean_photons, 1.0) - 0.9));
    level_dev = std::max(level_dev, std::abs(detection_probability_closed(0.0, row.diameters->phi_star,
                                                                          row.mean_photons, 1.0) - 0.9));
  }
  const bool ok = std::abs(d.beta_fit->slope + 1.0) <= 0.02 && std::abs(d.phi_fit->slope + 0.5) <= 0.02 &&
                  level_dev <= 1e-10;
  return {ok, "slopes beta* " + num(d.beta_fit->slope) + " (-1 +- 0.02), phi* " + num(d.phi_fit->slope) +
                  " (-0.5 +- 0.02); max |P - P0| on axes " + num(level_dev) + " (tol 1e-10)"};
}

Outcome leading_constant(Target target, double lo, double hi) {
  const std::int64_t n = 10000;
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (double big_n : {10.0, 100.0, 1000.0}) {
    for (double eta : {0.2, 0.6, 1.0}) {
      const double d = 0.5 / big_n;
      const double var = target == Target::beta ? variance_error_propagation(d, 0.0, big_n, eta, n, target)
                                                : variance_error_propagation(0.0, d, big_n, eta, n, target);
      const double lead = target == Target::beta ? heisenberg_variance(big_n, eta, n) : sql_variance(big_n, eta, n);
      vmin = std::min(vmin, var / lead);
      vmax = std::max(vmax, var / lead);
    }
  }
  const char* name = target == Target::beta ? "Var x 32 eta~ n N^2" : "Var x 4 eta~ n N";
  return {vmin >= lo && vmax <= hi,
          std::string(name) + " in [" + num(vmin) + ", " + num(vmax) + "], band [" + num(lo) + ", " + num(hi) + "]"};
}

Outcome monte_carlo() {
  Stopwatch sw;
  CampaignSpec beta;
  beta.config.mean_photons = 20.0;
  beta.config.eta = 1.0;
  beta.target = Target::beta;
  beta.offset = 0.01;
  beta.trials = 10000;
  beta.experiments = 500;
  beta.master_seed = 1;
  const CampaignSummary b = mc_campaign(beta);

  CampaignSpec phi = beta;
  phi.target = Target::phi_minus;
  phi.offset = 0.05;
  const CampaignSummary f = mc_campaign(phi);
  const double t = sw.seconds();

  const double sql_ratio = f.sample_variance / f.leading_term;
  const bool ok = within(b.variance_ratio, 0.85, 1.15) && b.clamp_fraction < 0.01 &&
                  within(f.variance_ratio, 0.85, 1.15) && within(sql_ratio, 0.85, 1.15) && f.clamp_fraction < 0.01 &&
                  t < 30.0;
  return {ok, "beta: sample/predicted " + num(b.variance_ratio) + ", clamped " + num(b.clamp_fraction) +
                  "; phi-: sample/predicted " + num(f.variance_ratio) + ", sample/SQL " + num(sql_ratio) +
                  ", clamped " + num(f.clamp_fraction) + "; band [0.85, 1.15], " + num(t) + " s (limit 30 s)"};
}

Outcome loss_robustness() {
  const double big_n = 1000.0;
  const double d = 0.5 / big_n;
  const std::int64_t n = 10000;
  const double expected = 1.0 / eta_tilde(0.5);
  const double analytic = variance_error_propagation(d, 0.0, big_n, 0.5, n, Target::beta) /
                          variance_error_propagation(d, 0.0, big_n, 1.0, n, Target::beta);

  CampaignSpec spec;
  spec.config.mean_photons = big_n;
  spec.target = Target::beta;
  spec.offset = d;
  spec.trials = n;
  spec.experiments = 500;
  spec.master_seed = 1;
  spec.config.eta = 1.0;
  const CampaignSummary full = mc_campaign(spec);
  spec.config.eta = 0.5;
  const CampaignSummary lossy = mc_campaign(spec);
  const double mc = lossy.sample_variance / full.sample_variance;

  const bool ok = rel_dev(analytic, expected) <= 0.05 && rel_dev(mc, expected) <= 0.15;
  return {ok, "Var(eta=0.5)/Var(eta=1): analytic " + num(analytic) + " (4/3 +- 5%), Monte Carlo " + num(mc) +
                  " (4/3 +- 15%)"};
}

Outcome loss_compensation() {
  const double eta = 0.2;
  const double compensated = 4.0 / std::sqrt(eta_tilde(eta));
  double worst = 0.0;
  const int k = 60;
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; j <= k; ++j) {
      const double beta = -0.3 + 0.6 * i / k;
      const double phi = -0.3 + 0.6 * j / k;
      worst = std::max(worst, std::abs(detection_probability_closed(beta, phi, 4.0, 1.0) -
                                       detection_probability_closed(beta, phi, compensated, eta)));
    }
  }
  return {worst < 0.02, "sup |P(N=4, eta=1) - P(N=" + num(compensated) + ", eta=0.2)| = " + num(worst) +
                            " on |beta|,|phi-| <= 0.3 (limit 0.02)"};
}

Outcome plateau() {
  const std::int64_t n = 10000;
  auto beta_value = [&](double big_n) {
    return error_propagation_precision(0.3 / big_n, 0.0, big_n, 1.0, n, Target::beta) / (big_n * big_n);
  };
  auto phi_value = [&](double big_n) {
    return error_propagation_precision(0.0, 0.3 / std::sqrt(big_n), big_n, 1.0, n, Target::phi_minus) / big_n;
  };
  const double b2 = beta_value(2.0);
  const double b20 = beta_value(20.0);
  const double f2 = phi_value(2.0);
  const double f20 = phi_value(20.0);
  const bool ok = rel_dev(b20, b2) <= 0.2 && rel_dev(f20, f2) <= 0.2;
  return {ok, "1/(N^2 Var beta) at 0.3/N: N=2 " + num(b2) + ", N=20 " + num(b20) + "; 1/(N Var phi-) at 0.3/sqrt(N): N=2 " +
                  num(f2) + ", N=20 " + num(f20) + " (agreement within 20%)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "closed form equals determinant form", closed_vs_determinant},
      {2, "overlap matches Wigner quadrature", [] { return group_check("overlap-quadrature", 10.0); }},
      {3, "interferometer symplectic invariants", [] { return group_check("symplectic", 0.0); }},
      {4, "semi-axes of the marginal ellipses", semi_axes_reference_form},
      {5, "level-curve diameter scaling", diameter_slopes},
      {6, "Heisenberg constant", [] { return leading_constant(Target::beta, 0.95, 1.10); }},
      {7, "standard-quantum-limit constant", [] { return leading_constant(Target::phi_minus, 0.9, 1.1); }},
      {8, "Monte Carlo variance matches prediction", monte_carlo},
      {9, "loss robustness factor", loss_robustness},
      {10, "loss compensation by rescaling N", loss_compensation},
      {11, "rescaled-precision plateau", plateau},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  bool all_passed = true;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) {
      continue;
    }
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_passed = all_passed && o.passed;
    std::printf("%s C%d %s: %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
  }
  return all_passed ? 0 : 1;
}
