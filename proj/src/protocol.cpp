#include "sqmz/protocol.hpp"

#include <cmath>
#include <complex>
#include <utility>

#include "sqmz/errors.hpp"

namespace sqmz {

namespace {

void require_efficiency(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ArgumentError("detector efficiency eta must lie in (0, 1]");
  }
}

void require_mean_photons(double n) {
  if (!std::isfinite(n) || n < 0.0) {
    throw ArgumentError("mean photon number must be finite and non-negative");
  }
}

}  // namespace

double eta_tilde(double eta) { return eta * (2.0 - eta); }

double squeeze_from_mean_photons(double mean_photons) {
  require_mean_photons(mean_photons);
  return std::asinh(std::sqrt(mean_photons));
}

double mean_photons_from_squeeze(double r) {
  const double s = std::sinh(r);
  return s * s;
}

void ProtocolConfig::validate() const {
  require_mean_photons(mean_photons);
  require_efficiency(eta);
  for (double angle : {theta_in, theta_out, phi1, phi2}) {
    if (!std::isfinite(angle)) {
      throw ArgumentError("angles must be finite");
    }
  }
  channel_from_index(channel_index(anti_squeeze_channel));
}

TwoModeUnitary mz_unitary(double phi1, double phi2) {
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  CMat2 first;
  first << 1.0, i,
           i, 1.0;
  CMat2 second;
  second << 1.0, -i,
            -i, 1.0;
  CMat2 phases = CMat2::Zero();
  phases(0, 0) = std::polar(1.0, phi1);
  phases(1, 1) = std::polar(1.0, phi2);
  return TwoModeUnitary(CMat2(0.5 * second * phases * first));
}

Symplectic4 mz_symplectic(double phi1, double phi2) {
  const double pp = 0.5 * (phi1 + phi2);
  const double pm = 0.5 * (phi1 - phi2);
  const Mat2 r = rotation(pp);
  const double c = std::cos(pm);
  const double s = std::sin(pm);
  Mat4 o;
  o.block<2, 2>(0, 0) = c * r;
  o.block<2, 2>(0, 2) = -s * r;
  o.block<2, 2>(2, 0) = s * r;
  o.block<2, 2>(2, 2) = c * r;
  return Symplectic4(o);
}

PipelineState build_pipeline(const ProtocolConfig& config) {
  config.validate();
  const double r = config.squeeze_magnitude();
  CovMatrix sigma_in = single_mode_squeezed_cov(SqueezeParam(r, config.theta_in), Channel::one);
  CovMatrix sigma_mz = apply_network(mz_symplectic(config.phi1, config.phi2), sigma_in);
  CovMatrix sigma_out = single_mode_squeezed_cov(SqueezeParam(r, config.theta_out), config.anti_squeeze_channel);
  return PipelineState{std::move(sigma_in), std::move(sigma_mz), std::move(sigma_out)};
}

double detection_probability_det(const PipelineState& state, double eta) {
  require_efficiency(eta);
  return inverse_sqrt_determinant(eta * state.sigma_mz.matrix() + (2.0 - eta) * state.sigma_out.matrix());
}

double detection_probability_closed(double beta, double phi_minus, double mean_photons, double eta,
                                    Channel channel) {
  return no_click_probability(beta, phi_minus, mean_photons, eta, channel).p;
}

ProbabilityPair no_click_probability(double beta, double phi_minus, double mean_photons, double eta,
                                     Channel channel) {
  require_mean_photons(mean_photons);
  require_efficiency(eta);
  const double et = eta_tilde(eta);
  const double n = mean_photons;
  double c2 = std::cos(phi_minus);
  double s2 = std::sin(phi_minus);
  c2 *= c2;
  s2 *= s2;
  if (channel_from_index(channel_index(channel)) == Channel::two) {
    std::swap(c2, s2);
  }
  double sb2 = std::sin(beta);
  sb2 *= sb2;
  // 2N + (2c^2 + et s^4) N^2 - 2 c^2 cos(2 beta) N (1 + N), regrouped into
  // non-negative terms so that P <= 1 holds exactly in floating point.
  const double bracket = 2.0 * n * s2 + et * s2 * s2 * n * n + 4.0 * c2 * sb2 * n * (1.0 + n);
  const double x = et * bracket;
  const double root = std::sqrt(1.0 + x);
  return {1.0 / root, x / (root * (root + 1.0))};
}

LevelCurveDiameters level_curve_diameters(double p0, double mean_photons, double eta) {
  if (!(p0 > 0.0 && p0 < 1.0)) {
    throw ArgumentError("level P0 must lie in (0, 1)");
  }
  if (!(mean_photons > 0.0) || !std::isfinite(mean_photons)) {
    throw ArgumentError("mean photon number must be positive");
  }
  require_efficiency(eta);
  const double et = eta_tilde(eta);
  const double n = mean_photons;

  // Along phi_minus = 0: 1 + 4 et N (1 + N) sin^2(beta) = 1 / P0^2.
  const double beta_arg = (1.0 - p0 * p0) / (4.0 * et * n * (1.0 + n) * p0 * p0);
  // Along beta = 0: P = 1 / (1 + et N sin^2(phi)), hence sin^2(phi) = (1 - P0) / (et N P0).
  const double phi_arg = (1.0 - p0) / (et * n * p0);
  if (beta_arg > 1.0 || phi_arg > 1.0) {
    throw DomainError("level curve exceeds fundamental domain");
  }
  return {std::asin(std::sqrt(beta_arg)), std::asin(std::sqrt(phi_arg))};
}

}  // namespace sqmz
