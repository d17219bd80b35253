#pragma once

// Self-consistency checks that compare the library against routes that do not
// share its code path: direct quadrature of Wigner functions, the determinant
// form of the pipeline, explicit lifts of the interferometer unitary and
// central finite differences.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sqmz/phase_space.hpp"

namespace sqmz {

struct QuadratureRule {
  double half_width = 6.0;
  int points = 81;
};

/// (2 pi)^2 \int W_a(xi) W_b(xi) d^4 xi by the tensor-product trapezoid rule
/// on [-half_width, half_width]^4.
double overlap_by_quadrature(const Mat4& sigma_a, const Mat4& sigma_b, const QuadratureRule& rule = {});

/// Value of the Gaussian Wigner function with covariance sigma at xi.
double wigner(const Mat4& sigma, const Eigen::Vector4d& xi);

struct GroupReport {
  std::string name;
  bool passed = false;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::size_t cases = 0;
  std::string description;
};

/// Names accepted by run_verification_group, in reporting order.
const std::vector<std::string>& verification_groups();

/// Throws ArgumentError for an unknown group name.
GroupReport run_verification_group(std::string_view name, std::uint64_t seed = 1);

}  // namespace sqmz
