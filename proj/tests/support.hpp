#pragma once

#include <cmath>
#include <random>

#include <Eigen/Core>

#include "arflow/capsule.hpp"
#include "arflow/motion.hpp"
#include "arflow/rotation.hpp"
#include "arflow/skeleton.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d axis(n(rng), n(rng), n(rng));
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  return arflow::axis_angle_matrix(axis.normalized(), ang(rng));
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// A frame with every rotation drawn at random.
inline arflow::BodyPoseFrame random_frame(std::mt19937_64& rng, int joints, double trans_scale = 1.0) {
  arflow::BodyPoseFrame f = arflow::BodyPoseFrame::identity(joints);
  for (auto& r : f.joint_rot) r = arflow::rot6d_encode(random_rotation(rng));
  f.root_rot = arflow::rot6d_encode(random_rotation(rng));
  std::normal_distribution<double> n(0.0, trans_scale);
  f.root_trans = Eigen::Vector3d(n(rng), n(rng), n(rng));
  return f;
}

inline arflow::MotionTensor random_motion(std::mt19937_64& rng, const arflow::Skeleton& skel, int frames,
                                          double trans_scale = 1.0) {
  arflow::MotionTensor m(frames, skel.frame_dim());
  for (int h = 0; h < frames; ++h) arflow::set_motion_frame(m, h, random_frame(rng, skel.joint_count(), trans_scale));
  return m;
}

/// Point-to-segment distance written out independently of the library.
inline double segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::fmin(1.0, std::fmax(0.0, s));
  return (p - (a + s * ab)).norm();
}

inline bool inside_capsule(const Eigen::Vector3d& p, const arflow::Capsule& c) {
  return segment_distance(p, c.endpoint_a, c.endpoint_b) < c.radius;
}

}  // namespace testing
