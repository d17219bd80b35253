#include "sqmz/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "sqmz/errors.hpp"
#include "sqmz/estimation.hpp"
#include "sqmz/protocol.hpp"

namespace sqmz {

namespace {

constexpr double kPi = std::numbers::pi;

class Uniform {
 public:
  Uniform(std::uint64_t seed, std::uint64_t group) : stream_({seed, group}) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * stream_.uniform(); }

 private:
  TrialStream stream_;
};

ProtocolConfig config_for(double beta, double phi_minus, double mean_photons, double eta, Channel channel,
                          double phi_plus, double theta_in) {
  ProtocolConfig c;
  c.mean_photons = mean_photons;
  c.eta = eta;
  c.anti_squeeze_channel = channel;
  c.phi1 = phi_plus + phi_minus;
  c.phi2 = phi_plus - phi_minus;
  c.theta_in = theta_in;
  c.theta_out = phi_plus + theta_in - beta;
  return c;
}

GroupReport closed_vs_det(std::uint64_t seed) {
  GroupReport rep{"closed-vs-det", false, 0.0, 1e-12, 0,
                  "closed-form P vs det(eta sigma_MZ + (2-eta) sigma_out)^(-1/2), both channels"};
  Uniform u(seed, 1);
  for (int ch = 1; ch <= 2; ++ch) {
    for (double n : {1.0, 4.0, 20.0}) {
      for (double eta : {0.2, 0.6, 1.0}) {
        for (int i = 0; i < 21; ++i) {
          for (int j = 0; j < 21; ++j) {
            const double beta = -kPi / 2 + kPi * i / 20.0;
            const double phi = -kPi / 2 + kPi * j / 20.0;
            const ProtocolConfig c =
                config_for(beta, phi, n, eta, channel_from_index(ch), u(-kPi, kPi), u(-kPi, kPi));
            // beta as realized by the physical phases, which is what the pipeline sees.
            const double det = detection_probability_det(build_pipeline(c), eta);
            const double closed = detection_probability_closed(c.beta(), c.phi_minus(), n, eta, c.anti_squeeze_channel);
            rep.max_deviation = std::max(rep.max_deviation, std::abs(det - closed));
            ++rep.cases;
          }
        }
      }
    }
  }
  rep.passed = rep.max_deviation <= rep.tolerance;
  return rep;
}

GroupReport overlap_quadrature(std::uint64_t seed) {
  GroupReport rep{"overlap-quadrature", false, 0.0, 1e-3, 0,
                  "det(sigma_a + sigma_b)^(-1/2) vs trapezoid quadrature of (2pi)^2 W_a W_b on [-6,6]^4"};
  Uniform u(seed, 2);
  for (int k = 0; k < 20; ++k) {
    ProtocolConfig c;
    c.mean_photons = mean_photons_from_squeeze(u(0.0, 1.0));
    c.theta_in = u(-kPi, kPi);
    c.theta_out = u(-kPi, kPi);
    c.phi1 = u(-kPi, kPi);
    c.phi2 = u(-kPi, kPi);
    c.anti_squeeze_channel = k % 2 == 0 ? Channel::one : Channel::two;
    const PipelineState s = build_pipeline(c);
    const double closed = gaussian_overlap(s.sigma_mz, s.sigma_out);
    const double quad = overlap_by_quadrature(s.sigma_mz.matrix(), s.sigma_out.matrix());
    rep.max_deviation = std::max(rep.max_deviation, std::abs(closed - quad));
    ++rep.cases;
  }
  rep.passed = rep.max_deviation <= rep.tolerance;
  return rep;
}

GroupReport symplectic(std::uint64_t seed) {
  GroupReport rep{"symplectic", false, 0.0, 1e-12, 0,
                  "O^T O = I, O^T Omega O = Omega, and O_MZ equals the lift of the interferometer unitary"};
  Uniform u(seed, 3);
  for (int k = 0; k < 100; ++k) {
    const double phi1 = u(-2 * kPi, 2 * kPi);
    const double phi2 = u(-2 * kPi, 2 * kPi);
    const Symplectic4 o = mz_symplectic(phi1, phi2);
    const Symplectic4 lifted = unitary_to_symplectic(mz_unitary(phi1, phi2));
    const double lift_dev = (o.matrix() - lifted.matrix()).cwiseAbs().maxCoeff();
    rep.max_deviation =
        std::max({rep.max_deviation, o.orthogonality_defect(), o.symplecticity_defect(), lift_dev});
    ++rep.cases;
  }
  rep.passed = rep.max_deviation <= rep.tolerance;
  return rep;
}

GroupReport semi_axes(std::uint64_t seed) {
  GroupReport rep{"semi-axes", false, 0.0, 1e-9, 0,
                  "eig(2 marginal_i(sigma_MZ)) = 1 + 2 w_i (N +- sqrt(N(1+N))), w_1 = cos^2 phi-, w_2 = sin^2 phi-"};
  Uniform u(seed, 4);
  for (int k = 0; k < 200; ++k) {
    ProtocolConfig c;
    c.mean_photons = mean_photons_from_squeeze(u(0.0, 2.0));
    c.theta_in = u(-kPi, kPi);
    c.phi1 = u(-kPi, kPi);
    c.phi2 = u(-kPi, kPi);
    const PipelineState s = build_pipeline(c);
    const double n = c.mean_photons;
    const double root = std::sqrt(n * (1.0 + n));
    const double c2 = std::pow(std::cos(c.phi_minus()), 2);
    for (Channel ch : {Channel::one, Channel::two}) {
      const double w = ch == Channel::one ? c2 : 1.0 - c2;
      const Eigen::Vector2d ev = 2.0 * marginal(s.sigma_mz, ch).eigenvalues();
      const double lo = 1.0 + 2.0 * w * (n - root);
      const double hi = 1.0 + 2.0 * w * (n + root);
      rep.max_deviation = std::max({rep.max_deviation, std::abs(ev(0) - lo), std::abs(ev(1) - hi)});
      ++rep.cases;
    }
  }
  rep.passed = rep.max_deviation <= rep.tolerance;
  return rep;
}

GroupReport physicality(std::uint64_t seed) {
  GroupReport rep{"physicality", false, 0.0, 1e-12, 0,
                  "every pipeline covariance (and its attenuated version) satisfies sigma + i Omega / 2 >= 0"};
  Uniform u(seed, 5);
  for (int k = 0; k < 100; ++k) {
    ProtocolConfig c;
    c.mean_photons = mean_photons_from_squeeze(u(0.0, 3.0));
    c.theta_in = u(-kPi, kPi);
    c.theta_out = u(-kPi, kPi);
    c.phi1 = u(-kPi, kPi);
    c.phi2 = u(-kPi, kPi);
    const PipelineState s = build_pipeline(c);
    for (const CovMatrix* m : {&s.sigma_in, &s.sigma_mz, &s.sigma_out}) {
      const CovMatrix lossy = attenuator(*m, u(0.05, 1.0));
      rep.max_deviation = std::max({rep.max_deviation, -m->uncertainty_margin(), -lossy.uncertainty_margin()});
      rep.cases += 2;
    }
  }
  rep.passed = rep.max_deviation <= rep.tolerance;
  return rep;
}

GroupReport derivatives(std::uint64_t seed) {
  GroupReport rep{"derivatives", false, 0.0, 1e-6, 0,
                  "analytic dP/dbeta, dP/dphi- vs central differences (h = 1e-6), relative error"};
  Uniform u(seed, 6);
  constexpr double h = 1e-6;
  for (int k = 0; k < 200; ++k) {
    const double n = std::pow(10.0, u(0.0, 2.0));
    const double eta = u(0.2, 1.0);
    const double beta = u(0.05, 1.5);
    const double phi = u(0.05, 1.5);
    const Channel ch = k % 2 == 0 ? Channel::one : Channel::two;
    for (Target t : {Target::beta, Target::phi_minus}) {
      const double analytic = probability_derivative(beta, phi, n, eta, t, ch);
      const double db = t == Target::beta ? h : 0.0;
      const double df = t == Target::phi_minus ? h : 0.0;
      const double fd = (detection_probability_closed(beta + db, phi + df, n, eta, ch) -
                         detection_probability_closed(beta - db, phi - df, n, eta, ch)) /
                        (2.0 * h);
      if (std::abs(analytic) < 1e-6) {
        continue;
      }
      rep.max_deviation = std::max(rep.max_deviation, std::abs(fd - analytic) / std::abs(analytic));
      ++rep.cases;
    }
  }
  rep.passed = rep.max_deviation <= rep.tolerance;
  return rep;
}

GroupReport mle_consistency(std::uint64_t seed) {
  GroupReport rep{"mle-consistency", false, 0.0, 1e-10, 0,
                  "interior MLE estimates reproduce the observed fraction through the closed form"};
  Uniform u(seed, 7);
  for (int k = 0; k < 200; ++k) {
    const double n = std::pow(10.0, u(0.0, 3.0));
    const double eta = u(0.2, 1.0);
    const double nuisance = u(0.0, 0.3);
    const double f = u(0.0, 1.0);
    for (Target t : {Target::beta, Target::phi_minus}) {
      const EstimationResult r =
          t == Target::beta ? invert_beta(f, nuisance, n, eta) : invert_phi_minus(f, nuisance, n, eta);
      if (r.status != EstimateStatus::interior) {
        continue;
      }
      const double p = t == Target::beta ? detection_probability_closed(r.estimate, nuisance, n, eta)
                                         : detection_probability_closed(nuisance, r.estimate, n, eta);
      rep.max_deviation = std::max(rep.max_deviation, std::abs(p - f));
      ++rep.cases;
    }
  }
  rep.passed = rep.cases > 0 && rep.max_deviation <= rep.tolerance;
  return rep;
}

}  // namespace

double wigner(const Mat4& sigma, const Eigen::Vector4d& xi) {
  const double q = xi.dot(sigma.inverse() * xi);
  return std::exp(-0.5 * q) / (4.0 * kPi * kPi * std::sqrt(sigma.determinant()));
}

double overlap_by_quadrature(const Mat4& sigma_a, const Mat4& sigma_b, const QuadratureRule& rule) {
  if (rule.points < 2 || !(rule.half_width > 0.0)) {
    throw ArgumentError("quadrature needs at least two points and a positive half width");
  }
  // (2 pi)^2 W_a W_b = exp(-xi^T M xi / 2) / ((2 pi)^2 sqrt(det a det b)), M = a^-1 + b^-1.
  const Mat4 m = sigma_a.inverse() + sigma_b.inverse();
  const double norm = 1.0 / (4.0 * kPi * kPi * std::sqrt(sigma_a.determinant() * sigma_b.determinant()));

  const int k = rule.points;
  const double L = rule.half_width;
  const double h = 2.0 * L / (k - 1);
  std::vector<double> t(k);
  std::vector<double> w(k, h);
  for (int i = 0; i < k; ++i) {
    t[i] = -L + h * i;
  }
  w.front() = w.back() = 0.5 * h;

  const double m33 = m(3, 3);
  const double decay = std::exp(-m33 * h * h);
  double total = 0.0;
  for (int i0 = 0; i0 < k; ++i0) {
    for (int i1 = 0; i1 < k; ++i1) {
      for (int i2 = 0; i2 < k; ++i2) {
        const double x0 = t[i0];
        const double x1 = t[i1];
        const double x2 = t[i2];
        const double q3 = m(0, 0) * x0 * x0 + m(1, 1) * x1 * x1 + m(2, 2) * x2 * x2 +
                          2.0 * (m(0, 1) * x0 * x1 + m(0, 2) * x0 * x2 + m(1, 2) * x1 * x2);
        const double b = m(3, 0) * x0 + m(3, 1) * x1 + m(3, 2) * x2;
        // Along x3 the exponent is -(m33 x3^2 + 2 b x3 + q3)/2. Walk outward from
        // its grid maximum with a multiplicative recurrence (constant second difference).
        const int peak = std::clamp(static_cast<int>(std::lround((-b / m33 + L) / h)), 0, k - 1);
        const double tp = t[peak];
        const double top = std::exp(-0.5 * (m33 * tp * tp + 2.0 * b * tp + q3));
        if (top == 0.0) {
          continue;
        }
        double line = w[peak] * top;
        double term = top;
        double ratio = std::exp(-h * (m33 * tp + b) - 0.5 * m33 * h * h);
        for (int j = peak + 1; j < k && term > 0.0; ++j) {
          term *= ratio;
          ratio *= decay;
          line += w[j] * term;
        }
        term = top;
        ratio = std::exp(h * (m33 * tp + b) - 0.5 * m33 * h * h);
        for (int j = peak - 1; j >= 0 && term > 0.0; --j) {
          term *= ratio;
          ratio *= decay;
          line += w[j] * term;
        }
        total += w[i0] * w[i1] * w[i2] * line;
      }
    }
  }
  return norm * total;
}

const std::vector<std::string>& verification_groups() {
  static const std::vector<std::string> names = {"closed-vs-det", "overlap-quadrature", "symplectic",
                                                 "semi-axes",     "physicality",        "derivatives",
                                                 "mle-consistency"};
  return names;
}

GroupReport run_verification_group(std::string_view name, std::uint64_t seed) {
  if (name == "closed-vs-det") return closed_vs_det(seed);
  if (name == "overlap-quadrature") return overlap_quadrature(seed);
  if (name == "symplectic") return symplectic(seed);
  if (name == "semi-axes") return semi_axes(seed);
  if (name == "physicality") return physicality(seed);
  if (name == "derivatives") return derivatives(seed);
  if (name == "mle-consistency") return mle_consistency(seed);
  throw ArgumentError("unknown verification group '" + std::string(name) + "'");
}

}  // namespace sqmz
