#pragma once

// Squeezer -> balanced Mach-Zehnder -> anti-squeezer -> on-off detectors.
//
// The observable is the joint no-click event (projection onto vacuum after
// anti-squeezing); its probability is P. Detector inefficiency is modelled as
// an attenuator of transmittivity eta in front of each detector.

#include "sqmz/phase_space.hpp"

namespace sqmz {

/// eta (2 - eta).
double eta_tilde(double eta);

double squeeze_from_mean_photons(double mean_photons);
double mean_photons_from_squeeze(double r);

struct ProtocolConfig {
  double mean_photons = 1.0;
  double theta_in = 0.0;
  double theta_out = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double eta = 1.0;
  Channel anti_squeeze_channel = Channel::one;

  /// Throws ArgumentError on N < 0, eta outside (0, 1], or non-finite angles.
  void validate() const;

  double squeeze_magnitude() const { return squeeze_from_mean_photons(mean_photons); }
  double phi_plus() const { return 0.5 * (phi1 + phi2); }
  double phi_minus() const { return 0.5 * (phi1 - phi2); }
  /// phi_+ + theta_in - theta_out.
  double beta() const { return phi_plus() + theta_in - theta_out; }
  double eta_tilde() const { return sqmz::eta_tilde(eta); }
};

struct PipelineState {
  CovMatrix sigma_in;
  CovMatrix sigma_mz;
  /// Covariance of the anti-squeezed vacuum the state is projected onto.
  CovMatrix sigma_out;
};

/// (1/2)[[1,-i],[-i,1]] diag(e^{i phi1}, e^{i phi2}) [[1,i],[i,1]].
TwoModeUnitary mz_unitary(double phi1, double phi2);

/// Phase-space action of the interferometer:
///   [[ c R(phi+), -s R(phi+) ],
///    [ s R(phi+),  c R(phi+) ]]  with c = cos phi-, s = sin phi-.
Symplectic4 mz_symplectic(double phi1, double phi2);

PipelineState build_pipeline(const ProtocolConfig& config);

/// det(eta sigma_mz + (2 - eta) sigma_out)^{-1/2}.
double detection_probability_det(const PipelineState& state, double eta);

/// Closed form of the no-click probability as a function of (beta, phi_minus).
/// Channel two is the channel-one expression with cos and sin of phi_minus swapped.
double detection_probability_closed(double beta, double phi_minus, double mean_photons, double eta,
                                    Channel channel = Channel::one);

/// P together with 1 - P, the latter computed without cancellation near P = 1.
struct ProbabilityPair {
  double p = 1.0;
  double complement = 0.0;
};

ProbabilityPair no_click_probability(double beta, double phi_minus, double mean_photons, double eta,
                                     Channel channel = Channel::one);

struct LevelCurveDiameters {
  double beta_star = 0.0;
  double phi_star = 0.0;
};

/// Intersections of the level curve P = p0 with the beta and phi_minus axes.
/// Throws DomainError when either intersection lies outside the fundamental domain.
LevelCurveDiameters level_curve_diameters(double p0, double mean_photons, double eta);

}  // namespace sqmz
