#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "arflow/rotation.hpp"
#include "arflow/skeleton.hpp"

namespace arflow {

/// H x D motion: one row per frame. Row layout for a K-joint skeleton is
/// [joint rotations 6K | root rotation 6 | root translation 3].
using MotionTensor = Eigen::MatrixXd;

struct MotionLayout {
  int joints;

  int frame_dim() const { return 6 * (joints + 1) + 3; }
  int joint_rot(int j) const { return 6 * j; }
  int root_rot() const { return 6 * joints; }
  int root_trans() const { return 6 * joints + 6; }
};

struct BodyPoseFrame {
  std::vector<Rotation6D> joint_rot;
  Rotation6D root_rot;
  Eigen::Vector3d root_trans = Eigen::Vector3d::Zero();

  static BodyPoseFrame identity(int joints);
  bool operator==(const BodyPoseFrame&) const = default;
};

BodyPoseFrame frame_from_row(std::span<const double> row, int joints);
void frame_to_row(const BodyPoseFrame& frame, std::span<double> row);

BodyPoseFrame motion_frame(const MotionTensor& motion, int h, int joints);
void set_motion_frame(MotionTensor& motion, int h, const BodyPoseFrame& frame);

/// Throws DimensionMismatch unless motion has skel.frame_dim() columns and at least one row.
void check_motion(const MotionTensor& motion, const Skeleton& skel);

bool all_finite(const MotionTensor& motion);

}  // namespace arflow
