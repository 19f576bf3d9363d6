#pragma once

#include <vector>

#include <Eigen/Core>

#include "arflow/motion.hpp"
#include "arflow/skeleton.hpp"

namespace arflow {

/// World joint positions for one frame. Throws DimensionMismatch when the
/// frame's joint count differs from the skeleton's.
std::vector<Eigen::Vector3d> forward_kinematics(const Skeleton& skel, const BodyPoseFrame& frame);

/// World joint orientations alongside positions.
struct JointTransforms {
  std::vector<Eigen::Vector3d> position;
  std::vector<Eigen::Matrix3d> rotation;
};
JointTransforms joint_transforms(const Skeleton& skel, const BodyPoseFrame& frame);

/// Positions for frame h of a motion tensor.
std::vector<Eigen::Vector3d> motion_joint_positions(const Skeleton& skel, const MotionTensor& motion, int h);

}  // namespace arflow
