#include <cmath>

#include <gtest/gtest.h>

#include "sqmz/errors.hpp"
#include "sqmz/estimation.hpp"
#include "sqmz/protocol.hpp"

namespace sqmz {
namespace {

constexpr double kPi = 3.14159265358979323846;

ProtocolConfig at(double beta, double phi_minus, double n, double eta, Channel ch = Channel::one) {
  ProtocolConfig c;
  c.mean_photons = n;
  c.eta = eta;
  c.anti_squeeze_channel = ch;
  c.theta_in = 0.4;
  c.phi1 = -0.9 + phi_minus;
  c.phi2 = -0.9 - phi_minus;
  c.theta_out = c.phi_plus() + c.theta_in - beta;
  return c;
}

TEST(Config, DerivedPhases) {
  ProtocolConfig c;
  c.phi1 = 0.5;
  c.phi2 = 0.1;
  c.theta_in = 0.2;
  c.theta_out = 0.05;
  EXPECT_DOUBLE_EQ(c.phi_plus(), 0.3);
  EXPECT_DOUBLE_EQ(c.phi_minus(), 0.2);
  EXPECT_NEAR(c.beta(), 0.45, 1e-15);
}

TEST(Config, Validation) {
  ProtocolConfig c;
  c.eta = 0.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c.eta = 1.0;
  c.mean_photons = -1.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c.mean_photons = 1.0;
  c.phi1 = INFINITY;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(EtaTilde, Values) {
  EXPECT_DOUBLE_EQ(eta_tilde(1.0), 1.0);
  EXPECT_DOUBLE_EQ(eta_tilde(0.5), 0.75);
  EXPECT_NEAR(eta_tilde(0.2), 0.36, 1e-15);
}

TEST(MzUnitary, MatchesLiftedSymplectic) {
  for (double p1 : {-2.0, 0.0, 0.7}) {
    for (double p2 : {-0.3, 1.9}) {
      const Mat4 lift = unitary_to_symplectic(mz_unitary(p1, p2)).matrix();
      EXPECT_LT((lift - mz_symplectic(p1, p2).matrix()).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(MzUnitary, BalancedPhasesActAsIdentityUpToPhase) {
  const CMat2 u = mz_unitary(0.0, 0.0).matrix();
  EXPECT_NEAR(std::abs(u(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-15);
}

TEST(Probability, PeakIsOne) {
  for (double n : {0.5, 4.0, 100.0}) {
    for (double eta : {0.2, 1.0}) {
      EXPECT_DOUBLE_EQ(detection_probability_closed(0.0, 0.0, n, eta), 1.0);
      EXPECT_NEAR(detection_probability_det(build_pipeline(at(0.0, 0.0, n, eta)), eta), 1.0, 1e-12);
    }
  }
}

TEST(Probability, KnownCorners) {
  const double n = 4.0;
  // phi- = pi/2: 1/(1 + N); beta = pi/2, phi- = 0: 1/(2N + 1)
  EXPECT_NEAR(detection_probability_closed(0.3, kPi / 2, n, 1.0), 1.0 / (1.0 + n), 1e-14);
  EXPECT_NEAR(detection_probability_closed(kPi / 2, 0.0, n, 1.0), 1.0 / (2.0 * n + 1.0), 1e-14);
}

TEST(Probability, LosslessAxisForms) {
  // At eta = 1 the axes reduce to P = 1/(1 + N sin^2 phi) and P = (1 + 4 N(1+N) sin^2 beta)^(-1/2).
  for (double n : {1.0, 20.0}) {
    for (double x : {0.01, 0.2, 1.1}) {
      EXPECT_NEAR(detection_probability_closed(0.0, x, n, 1.0), 1.0 / (1.0 + n * std::pow(std::sin(x), 2)), 1e-14);
      EXPECT_NEAR(detection_probability_closed(x, 0.0, n, 1.0),
                  1.0 / std::sqrt(1.0 + 4.0 * n * (1.0 + n) * std::pow(std::sin(x), 2)), 1e-14);
    }
  }
}

TEST(Probability, ClosedMatchesDeterminantBothChannels) {
  for (Channel ch : {Channel::one, Channel::two}) {
    for (double eta : {0.3, 1.0}) {
      for (double b : {-1.2, 0.05, 0.8}) {
        for (double f : {-0.6, 0.0, 1.4}) {
          const double det = detection_probability_det(build_pipeline(at(b, f, 7.0, eta, ch)), eta);
          EXPECT_NEAR(detection_probability_closed(b, f, 7.0, eta, ch), det, 1e-12);
        }
      }
    }
  }
}

TEST(Probability, LosslessDeterminantEqualsOverlap) {
  const PipelineState s = build_pipeline(at(0.2, 0.3, 3.0, 1.0));
  EXPECT_EQ(detection_probability_det(s, 1.0), gaussian_overlap(s.sigma_mz, s.sigma_out));
}

TEST(Probability, ChannelTwoSwapsQuadrature) {
  EXPECT_NEAR(detection_probability_closed(0.4, 0.3, 5.0, 0.7, Channel::two),
              detection_probability_closed(0.4, kPi / 2 - 0.3, 5.0, 0.7, Channel::one), 1e-14);
}

TEST(Probability, BoundedAndSymmetric) {
  for (double b = -3.0; b <= 3.0; b += 0.37) {
    for (double f = -3.0; f <= 3.0; f += 0.41) {
      const double p = detection_probability_closed(b, f, 12.0, 0.6);
      EXPECT_GT(p, 0.0);
      EXPECT_LE(p, 1.0);
      EXPECT_EQ(p, detection_probability_closed(-b, f, 12.0, 0.6));
      EXPECT_EQ(p, detection_probability_closed(b, -f, 12.0, 0.6));
      EXPECT_NEAR(p, detection_probability_closed(b + kPi, f, 12.0, 0.6), 1e-12);
    }
  }
}

TEST(Probability, ComplementAccurateNearPeak) {
  const ProbabilityPair pair = no_click_probability(1e-9, 0.0, 1.0, 1.0);
  // 1 - P ~ x / 2 with x = 4 N (1 + N) beta^2 = 8e-18
  EXPECT_NEAR(pair.complement / 4e-18, 1.0, 1e-6);
  EXPECT_EQ(pair.p, 1.0);
}

TEST(LevelCurve, FrozenValues) {
  const LevelCurveDiameters d = level_curve_diameters(0.9, 4.0, 1.0);
  EXPECT_NEAR(d.beta_star, std::asin(std::sqrt((1.0 / 0.81 - 1.0) / 80.0)), 1e-14);
  EXPECT_NEAR(d.phi_star, std::asin(std::sqrt((1.0 / 0.9 - 1.0) / 4.0)), 1e-14);
  EXPECT_NEAR(d.beta_star, 0.0541754, 1e-7);
  EXPECT_NEAR(d.phi_star, 0.167448, 1e-6);
}

TEST(LevelCurve, LossyLevelHitExactly) {
  for (double eta : {0.3, 0.9}) {
    const LevelCurveDiameters d = level_curve_diameters(0.9, 50.0, eta);
    EXPECT_NEAR(detection_probability_closed(d.beta_star, 0.0, 50.0, eta), 0.9, 1e-12);
    EXPECT_NEAR(detection_probability_closed(0.0, d.phi_star, 50.0, eta), 0.9, 1e-12);
  }
}

TEST(LevelCurve, DomainErrors) {
  EXPECT_THROW(level_curve_diameters(0.1, 1.0, 1.0), DomainError);
  EXPECT_THROW(level_curve_diameters(1.0, 4.0, 1.0), ArgumentError);
  EXPECT_THROW(level_curve_diameters(0.0, 4.0, 1.0), ArgumentError);
}

}  // namespace
}  // namespace sqmz
