#pragma once

// Scalar-generic rotation decoding and forward kinematics. Instantiated with
// double for evaluation and with ad::Real where gradients through the
// kinematic chain are needed.

#include <array>
#include <cmath>
#include <vector>

#include "arflow/error.hpp"
#include "arflow/scalar_ad.hpp"
#include "arflow/skeleton.hpp"

namespace arflow::kin {

template <class T>
using Vec3 = std::array<T, 3>;

/// Row-major 3x3.
template <class T>
using Mat3 = std::array<T, 9>;

template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class T>
Mat3<T> matmul(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out[3 * i + j] = a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
    }
  }
  return out;
}

template <class T>
Vec3<T> apply(const Mat3<T>& m, const Vec3<T>& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2], m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

inline constexpr double kMinColumnNorm = 1e-8;
inline constexpr double kMaxAbsCosine = 1.0 - 1e-8;

/// Gram-Schmidt on the two stored columns; third column is their cross product.
template <class T>
Mat3<T> decode6d(const T* r) {
  using std::sqrt;
  const Vec3<T> a1{r[0], r[1], r[2]};
  const Vec3<T> a2{r[3], r[4], r[5]};
  const double n1 = std::sqrt(value_of(dot(a1, a1)));
  const double n2 = std::sqrt(value_of(dot(a2, a2)));
  if (!(n1 > kMinColumnNorm) || !(n2 > kMinColumnNorm)) {
    throw Error(ErrorCode::kDegenerateRotation, "6D rotation column norm below 1e-8");
  }
  if (std::abs(value_of(dot(a1, a2))) / (n1 * n2) >= kMaxAbsCosine) {
    throw Error(ErrorCode::kDegenerateRotation, "6D rotation columns are parallel");
  }
  const T inv1 = T(1.0) / sqrt(dot(a1, a1));
  const Vec3<T> b1{a1[0] * inv1, a1[1] * inv1, a1[2] * inv1};
  const T proj = dot(b1, a2);
  const Vec3<T> u{a2[0] - proj * b1[0], a2[1] - proj * b1[1], a2[2] - proj * b1[2]};
  const T inv2 = T(1.0) / sqrt(dot(u, u));
  const Vec3<T> b2{u[0] * inv2, u[1] * inv2, u[2] * inv2};
  const Vec3<T> b3 = cross(b1, b2);
  return {b1[0], b2[0], b3[0], b1[1], b2[1], b3[1], b1[2], b2[2], b3[2]};
}

template <class T>
struct Pose {
  std::vector<Vec3<T>> position;   // world joint positions
  std::vector<Mat3<T>> world_rot;  // world joint orientations
};

/// `row` holds one frame in motion layout (6K joint rotations, 6 root, 3 translation).
template <class T>
Pose<T> forward(const Skeleton& skel, const T* row) {
  const int k = skel.joint_count();
  Pose<T> pose;
  pose.position.resize(k);
  pose.world_rot.resize(k);
  const Mat3<T> root = decode6d(row + 6 * k);
  const T* trans = row + 6 * k + 6;
  for (int j = 0; j < k; ++j) {
    const Mat3<T> local = decode6d(row + 6 * j);
    const int p = skel.parent[j];
    if (p < 0) {
      pose.world_rot[j] = matmul(root, local);
      pose.position[j] = {trans[0], trans[1], trans[2]};
    } else {
      pose.world_rot[j] = matmul(pose.world_rot[p], local);
      const Eigen::Vector3d& off = skel.bone_offset[j];
      const Vec3<T> step = kin::apply(pose.world_rot[p], Vec3<T>{T(off.x()), T(off.y()), T(off.z())});
      pose.position[j] = {pose.position[p][0] + step[0], pose.position[p][1] + step[1],
                          pose.position[p][2] + step[2]};
    }
  }
  return pose;
}

}  // namespace arflow::kin
