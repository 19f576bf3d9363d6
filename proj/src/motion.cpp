#include "arflow/motion.hpp"

#include <string>

#include "arflow/error.hpp"

namespace arflow {

BodyPoseFrame BodyPoseFrame::identity(int joints) {
  BodyPoseFrame f;
  f.joint_rot.assign(joints, Rotation6D::identity());
  return f;
}

BodyPoseFrame frame_from_row(std::span<const double> row, int joints) {
  const MotionLayout layout{joints};
  if (static_cast<int>(row.size()) != layout.frame_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "frame row has " + std::to_string(row.size()) +
                                                   " values, expected " + std::to_string(layout.frame_dim()));
  }
  BodyPoseFrame f;
  f.joint_rot.resize(joints);
  for (int j = 0; j < joints; ++j) {
    for (int i = 0; i < 6; ++i) f.joint_rot[j].r[i] = row[layout.joint_rot(j) + i];
  }
  for (int i = 0; i < 6; ++i) f.root_rot.r[i] = row[layout.root_rot() + i];
  for (int i = 0; i < 3; ++i) f.root_trans[i] = row[layout.root_trans() + i];
  return f;
}

void frame_to_row(const BodyPoseFrame& frame, std::span<double> row) {
  const int joints = static_cast<int>(frame.joint_rot.size());
  const MotionLayout layout{joints};
  if (static_cast<int>(row.size()) != layout.frame_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "frame row width does not match the pose");
  }
  for (int j = 0; j < joints; ++j) {
    for (int i = 0; i < 6; ++i) row[layout.joint_rot(j) + i] = frame.joint_rot[j].r[i];
  }
  for (int i = 0; i < 6; ++i) row[layout.root_rot() + i] = frame.root_rot.r[i];
  for (int i = 0; i < 3; ++i) row[layout.root_trans() + i] = frame.root_trans[i];
}

BodyPoseFrame motion_frame(const MotionTensor& motion, int h, int joints) {
  const Eigen::RowVectorXd row = motion.row(h);
  return frame_from_row(std::span<const double>(row.data(), row.size()), joints);
}

void set_motion_frame(MotionTensor& motion, int h, const BodyPoseFrame& frame) {
  Eigen::RowVectorXd row(motion.cols());
  frame_to_row(frame, std::span<double>(row.data(), row.size()));
  motion.row(h) = row;
}

void check_motion(const MotionTensor& motion, const Skeleton& skel) {
  if (motion.rows() < 1 || motion.cols() != skel.frame_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "motion is " + std::to_string(motion.rows()) + "x" + std::to_string(motion.cols()) +
                    ", skeleton expects Hx" + std::to_string(skel.frame_dim()));
  }
}

bool all_finite(const MotionTensor& motion) { return motion.allFinite(); }

}  // namespace arflow
