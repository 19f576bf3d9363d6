#include "arflow/rotation.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "arflow/error.hpp"
#include "arflow/kinematics_core.hpp"

namespace arflow {

Eigen::Matrix3d rot6d_decode(const Rotation6D& rot) {
  const kin::Mat3<double> m = kin::decode6d(rot.r.data());
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out(i, j) = m[3 * i + j];
  }
  return out;
}

Rotation6D rot6d_encode(const Eigen::Matrix3d& m) {
  constexpr double kTol = 1e-6;
  const double ortho_err = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!m.allFinite() || !(ortho_err <= kTol) || !(std::abs(m.determinant() - 1.0) <= kTol)) {
    throw Error(ErrorCode::kNotARotation, "matrix is not orthonormal with det +1 (tol 1e-6)");
  }
  Rotation6D out;
  for (int i = 0; i < 3; ++i) {
    out.r[i] = m(i, 0);
    out.r[3 + i] = m(i, 1);
  }
  return out;
}

Eigen::Matrix3d axis_angle_matrix(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace arflow
