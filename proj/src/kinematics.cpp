#include "arflow/kinematics.hpp"

#include <string>

#include "arflow/error.hpp"
#include "arflow/kinematics_core.hpp"

namespace arflow {

namespace {

kin::Pose<double> pose_of(const Skeleton& skel, const BodyPoseFrame& frame) {
  if (static_cast<int>(frame.joint_rot.size()) != skel.joint_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "frame has " + std::to_string(frame.joint_rot.size()) +
                                                   " joint rotations, skeleton has " +
                                                   std::to_string(skel.joint_count()) + " joints");
  }
  std::vector<double> row(skel.frame_dim());
  frame_to_row(frame, row);
  return kin::forward(skel, row.data());
}

}  // namespace

std::vector<Eigen::Vector3d> forward_kinematics(const Skeleton& skel, const BodyPoseFrame& frame) {
  const kin::Pose<double> pose = pose_of(skel, frame);
  std::vector<Eigen::Vector3d> out;
  out.reserve(pose.position.size());
  for (const auto& p : pose.position) out.emplace_back(p[0], p[1], p[2]);
  return out;
}

JointTransforms joint_transforms(const Skeleton& skel, const BodyPoseFrame& frame) {
  const kin::Pose<double> pose = pose_of(skel, frame);
  JointTransforms out;
  for (std::size_t j = 0; j < pose.position.size(); ++j) {
    const auto& p = pose.position[j];
    out.position.emplace_back(p[0], p[1], p[2]);
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 3; ++c) r(i, c) = pose.world_rot[j][3 * i + c];
    }
    out.rotation.push_back(r);
  }
  return out;
}

std::vector<Eigen::Vector3d> motion_joint_positions(const Skeleton& skel, const MotionTensor& motion, int h) {
  check_motion(motion, skel);
  return forward_kinematics(skel, motion_frame(motion, h, skel.joint_count()));
}

}  // namespace arflow
