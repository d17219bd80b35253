#include "sqmz/phase_space.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "sqmz/errors.hpp"

namespace sqmz {

namespace {

constexpr double kPositivityTol = 1e-12;
constexpr double kGroupTol = 1e-12;
constexpr double kUnitaryTol = 1e-9;

template <typename M>
M symmetrized(const M& m) {
  return 0.5 * (m + m.transpose());
}

template <typename M>
void require_finite(const M& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

Channel channel_from_index(int index) {
  if (index != 1 && index != 2) {
    throw ArgumentError("channel index must be 1 or 2, got " + std::to_string(index));
  }
  return static_cast<Channel>(index);
}

SqueezeParam::SqueezeParam(double magnitude, double angle) : r(magnitude), theta(angle) {
  if (!std::isfinite(magnitude) || magnitude < 0.0) {
    throw ArgumentError("squeezing magnitude must be finite and non-negative");
  }
  if (!std::isfinite(angle)) {
    throw ArgumentError("squeezing angle must be finite");
  }
}

SqueezeParam SqueezeParam::from_mean_photons(double mean_photons, double angle) {
  if (!std::isfinite(mean_photons) || mean_photons < 0.0) {
    throw ArgumentError("mean photon number must be finite and non-negative");
  }
  return SqueezeParam(std::asinh(std::sqrt(mean_photons)), angle);
}

CovMatrix::CovMatrix(const Mat4& entries) : m_(symmetrized(entries)) {
  require_finite(m_, "covariance matrix");
  if (min_eigenvalue() <= -kPositivityTol) {
    throw ArgumentError("covariance matrix is not positive definite");
  }
}

double CovMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Mat4> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double CovMatrix::uncertainty_margin() const {
  const Eigen::Matrix4cd h = m_.cast<std::complex<double>>() +
                             std::complex<double>(0.0, 0.5) * symplectic_form().cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

MarginalCov::MarginalCov(const Mat2& entries) : m_(symmetrized(entries)) {
  require_finite(m_, "marginal covariance");
  if (eigenvalues()(0) <= -kPositivityTol) {
    throw ArgumentError("marginal covariance is not positive definite");
  }
}

Eigen::Vector2d MarginalCov::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Mat2> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

Symplectic4::Symplectic4(const Mat4& entries) : m_(entries) {
  require_finite(m_, "symplectic matrix");
  if (orthogonality_defect() > kGroupTol) {
    throw ArgumentError("network matrix is not orthogonal");
  }
  if (symplecticity_defect() > kGroupTol) {
    throw ArgumentError("network matrix is not symplectic");
  }
}

Symplectic4 Symplectic4::operator*(const Symplectic4& other) const {
  return Symplectic4(Mat4(m_ * other.m_));
}

double Symplectic4::orthogonality_defect() const {
  return (m_.transpose() * m_ - Mat4::Identity()).cwiseAbs().maxCoeff();
}

double Symplectic4::symplecticity_defect() const {
  const Mat4 omega = symplectic_form();
  return (m_.transpose() * omega * m_ - omega).cwiseAbs().maxCoeff();
}

TwoModeUnitary::TwoModeUnitary(const CMat2& entries) : m_(entries) {
  if (!m_.allFinite()) {
    throw ArgumentError("unitary has non-finite entries");
  }
  const double defect = (m_.adjoint() * m_ - CMat2::Identity()).norm();
  if (defect > kUnitaryTol) {
    throw ArgumentError("matrix is not unitary (||U^dagger U - I|| = " + std::to_string(defect) + ")");
  }
}

TwoModeUnitary TwoModeUnitary::operator*(const TwoModeUnitary& other) const {
  return TwoModeUnitary(CMat2(m_ * other.m_));
}

Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s,
       s, c;
  return r;
}

Mat4 symplectic_form() {
  Mat4 omega = Mat4::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  return omega;
}

Mat2 squeezer_matrix(const SqueezeParam& z) {
  // R diag(e^r, e^-r) R^T multiplied out; exactly symmetric with det 1.
  const double ch = std::cosh(z.r);
  const double sh = std::sinh(z.r);
  const double c2 = std::cos(2.0 * z.theta);
  const double s2 = std::sin(2.0 * z.theta);
  Mat2 s;
  s << ch + c2 * sh, s2 * sh,
       s2 * sh, ch - c2 * sh;
  return s;
}

CovMatrix vacuum_cov() { return CovMatrix(0.5 * Mat4::Identity()); }

CovMatrix single_mode_squeezed_cov(const SqueezeParam& z, Channel channel) {
  const int ch = channel_index(channel_from_index(channel_index(channel)));
  // S(r, theta)^2 = S(2r, theta): both factors share the same rotation.
  const Mat2 squeezed = 0.5 * squeezer_matrix(SqueezeParam(2.0 * z.r, z.theta));
  Mat4 m = 0.5 * Mat4::Identity();
  const int offset = ch == 1 ? 0 : 2;
  m.block<2, 2>(offset, offset) = squeezed;
  return CovMatrix(m);
}

Symplectic4 unitary_to_symplectic(const TwoModeUnitary& u) {
  Mat4 o;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const double re = u.matrix()(j, k).real();
      const double im = u.matrix()(j, k).imag();
      // Re I2 - i Im sigma_y, with -i sigma_y = [[0, -1], [1, 0]].
      o.block<2, 2>(2 * j, 2 * k) << re, -im,
                                     im, re;
    }
  }
  return Symplectic4(o);
}

CovMatrix apply_network(const Symplectic4& o, const CovMatrix& sigma) {
  return CovMatrix(o.matrix() * sigma.matrix() * o.matrix().transpose());
}

CovMatrix attenuator(const CovMatrix& sigma, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ArgumentError("detector efficiency eta must lie in (0, 1]");
  }
  return CovMatrix(eta * sigma.matrix() + 0.5 * (1.0 - eta) * Mat4::Identity());
}

double inverse_sqrt_determinant(const Mat4& m) {
  const double det = m.determinant();
  if (!std::isfinite(det) || det <= 0.0) {
    throw NumericError("determinant is not finite and positive: " + std::to_string(det));
  }
  return 1.0 / std::sqrt(det);
}

double gaussian_overlap(const CovMatrix& sigma_a, const CovMatrix& sigma_b) {
  return inverse_sqrt_determinant(sigma_a.matrix() + sigma_b.matrix());
}

MarginalCov marginal(const CovMatrix& sigma, Channel channel) {
  const int offset = channel_from_index(channel_index(channel)) == Channel::one ? 0 : 2;
  return MarginalCov(sigma.matrix().block<2, 2>(offset, offset));
}

double mean_photon_number(const CovMatrix& sigma) { return 0.5 * sigma.matrix().trace() - 1.0; }

}  // namespace sqmz
