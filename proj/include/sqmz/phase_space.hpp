#pragma once

// Two-mode Gaussian phase-space algebra.
//
// Quadratures are ordered (x1, p1, x2, p2) and the vacuum has variance 1/2
// per quadrature. All states are zero-mean, so a state is fully described by
// its covariance matrix.

#include <complex>

#include <Eigen/Core>

namespace sqmz {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using CMat2 = Eigen::Matrix2cd;

enum class Channel { one = 1, two = 2 };

/// Throws ArgumentError unless index is 1 or 2.
Channel channel_from_index(int index);
inline int channel_index(Channel ch) { return static_cast<int>(ch); }

/// Complex squeezing parameter z = r e^{i theta}. theta is kept unreduced.
struct SqueezeParam {
  double r = 0.0;
  double theta = 0.0;

  SqueezeParam() = default;
  SqueezeParam(double magnitude, double angle);

  /// Magnitude giving sinh(r)^2 = mean_photons.
  static SqueezeParam from_mean_photons(double mean_photons, double angle);
};

/// Real symmetric positive-definite 4x4 covariance matrix.
///
/// Construction symmetrizes the input and rejects matrices whose smallest
/// eigenvalue is below -1e-12 or that contain non-finite entries.
class CovMatrix {
 public:
  explicit CovMatrix(const Mat4& entries);

  const Mat4& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  double min_eigenvalue() const;
  /// Smallest eigenvalue of the Hermitian matrix sigma + (i/2) Omega.
  double uncertainty_margin() const;
  bool satisfies_uncertainty(double tol = 1e-12) const { return uncertainty_margin() >= -tol; }

 private:
  Mat4 m_;
};

/// 2x2 single-channel covariance (marginal of a CovMatrix).
class MarginalCov {
 public:
  explicit MarginalCov(const Mat2& entries);

  const Mat2& matrix() const { return m_; }
  /// Ascending eigenvalues.
  Eigen::Vector2d eigenvalues() const;

 private:
  Mat2 m_;
};

/// 4x4 real matrix that is both orthogonal and symplectic (to 1e-12).
class Symplectic4 {
 public:
  explicit Symplectic4(const Mat4& entries);

  const Mat4& matrix() const { return m_; }
  Symplectic4 operator*(const Symplectic4& other) const;

  double orthogonality_defect() const;
  double symplecticity_defect() const;

 private:
  Mat4 m_;
};

/// 2x2 unitary acting on the annihilation operators of a passive network.
class TwoModeUnitary {
 public:
  /// Throws ArgumentError if ||U^dagger U - I|| > 1e-9.
  explicit TwoModeUnitary(const CMat2& entries);

  const CMat2& matrix() const { return m_; }
  TwoModeUnitary operator*(const TwoModeUnitary& other) const;

 private:
  CMat2 m_;
};

/// Counter-clockwise rotation of the (x, p) plane by angle.
Mat2 rotation(double angle);

/// block-diag(J, J) with J = [[0, 1], [-1, 0]].
Mat4 symplectic_form();

/// S(z) = R(theta) diag(e^r, e^-r) R(theta)^T.
Mat2 squeezer_matrix(const SqueezeParam& z);

/// (1/2) I4.
CovMatrix vacuum_cov();

/// Squeezed vacuum on `channel`, vacuum on the other: block (1/2) S(z)^2.
CovMatrix single_mode_squeezed_cov(const SqueezeParam& z, Channel channel);

/// Block (j, k) of the result is Re(U_jk) I2 - i Im(U_jk) sigma_y.
Symplectic4 unitary_to_symplectic(const TwoModeUnitary& u);

/// O sigma O^T.
CovMatrix apply_network(const Symplectic4& o, const CovMatrix& sigma);

/// Equal-loss attenuator on both modes: eta sigma + (1 - eta)/2 I4.
/// Throws ArgumentError unless 0 < eta <= 1.
CovMatrix attenuator(const CovMatrix& sigma, double eta);

/// Overlap (2 pi)^2 \int W_a W_b = det(sigma_a + sigma_b)^{-1/2}.
/// Throws NumericError if the determinant is not finite and positive.
double gaussian_overlap(const CovMatrix& sigma_a, const CovMatrix& sigma_b);

/// Diagonal 2x2 block of `channel`.
MarginalCov marginal(const CovMatrix& sigma, Channel channel);

/// tr(sigma)/2 - 1.
double mean_photon_number(const CovMatrix& sigma);

/// det(m)^{-1/2}, shared by every overlap-style probability.
double inverse_sqrt_determinant(const Mat4& m);

}  // namespace sqmz
