#pragma once

#include <array>

#include <Eigen/Core>

namespace arflow {

/// Continuous 6D rotation parameterization: the first two columns of a
/// rotation matrix, stored column after column (r[0..2] is column 0).
struct Rotation6D {
  std::array<double, 6> r{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  static Rotation6D identity() { return {}; }
  bool operator==(const Rotation6D&) const = default;
};

/// Gram-Schmidt decoding. Throws DegenerateRotation when either column has
/// norm <= 1e-8 or the columns are parallel within 1e-8 in cosine.
Eigen::Matrix3d rot6d_decode(const Rotation6D& rot);

/// Reads off the first two columns. Throws NotARotation unless the input is
/// orthonormal with determinant +1 to within 1e-6.
Rotation6D rot6d_encode(const Eigen::Matrix3d& m);

Eigen::Matrix3d axis_angle_matrix(const Eigen::Vector3d& axis, double angle);

}  // namespace arflow
