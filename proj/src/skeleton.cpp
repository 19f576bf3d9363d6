#include "arflow/skeleton.hpp"

#include <string>

#include "arflow/error.hpp"

namespace arflow {

void Skeleton::validate() const {
  const int k = joint_count();
  if (k < 1) throw Error(ErrorCode::kInvalidConfig, "skeleton has no joints");
  if (static_cast<int>(bone_offset.size()) != k || static_cast<int>(capsule_radius.size()) != k) {
    throw Error(ErrorCode::kInvalidConfig, "skeleton arrays must all have joint_count entries");
  }
  if (parent[0] != -1) throw Error(ErrorCode::kInvalidConfig, "joint 0 must be the root (parent -1)");
  for (int j = 1; j < k; ++j) {
    if (parent[j] < 0 || parent[j] >= j) {
      throw Error(ErrorCode::kInvalidConfig,
                  "joint " + std::to_string(j) + " parent must satisfy 0 <= parent < index");
    }
  }
  for (int j = 0; j < k; ++j) {
    if (!(capsule_radius[j] > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "capsule radius of joint " + std::to_string(j) + " must be > 0");
    }
    if (!bone_offset[j].allFinite()) {
      throw Error(ErrorCode::kInvalidConfig, "bone offset of joint " + std::to_string(j) + " is not finite");
    }
  }
}

Skeleton Skeleton::desk_default() {
  Skeleton s;
  s.parent = {-1, 0, 1, 1, 3};
  s.bone_offset = {Eigen::Vector3d::Zero(), Eigen::Vector3d(0.0, 0.0, 0.45), Eigen::Vector3d(0.0, 0.0, 0.25),
                   Eigen::Vector3d(0.0, -0.2, 0.0), Eigen::Vector3d(0.0, -0.5, 0.0)};
  s.capsule_radius = {0.12, 0.12, 0.09, 0.06, 0.05};
  return s;
}

Skeleton Skeleton::chain(int joints, const Eigen::Vector3d& offset, double radius) {
  Skeleton s;
  for (int j = 0; j < joints; ++j) {
    s.parent.push_back(j - 1);
    s.bone_offset.push_back(j == 0 ? Eigen::Vector3d::Zero() : offset);
    s.capsule_radius.push_back(radius);
  }
  return s;
}

}  // namespace arflow
