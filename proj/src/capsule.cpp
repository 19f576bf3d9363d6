#include "arflow/capsule.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include "arflow/kinematics.hpp"

namespace arflow {

Aabb Aabb::merge(const Aabb& a, const Aabb& b) { return {a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi)}; }

Aabb Aabb::intersect(const Aabb& a, const Aabb& b) { return {a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi)}; }

CapsuleSet body_capsules(const Skeleton& skel, const BodyPoseFrame& frame) {
  const std::vector<Eigen::Vector3d> joints = forward_kinematics(skel, frame);
  CapsuleSet body;
  body.capsules.reserve(skel.bone_count());
  for (int j = 1; j < skel.joint_count(); ++j) {
    body.capsules.push_back({joints[skel.parent[j]], joints[j], skel.capsule_radius[j]});
  }
  return body;
}

CapsuleSet body_capsules(const Skeleton& skel, const MotionTensor& motion, int h) {
  check_motion(motion, skel);
  return body_capsules(skel, motion_frame(motion, h, skel.joint_count()));
}

Eigen::Vector3d closest_point_on_segment(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                         const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

double capsule_sdf(const Eigen::Vector3d& p, const Capsule& capsule) {
  return (p - closest_point_on_segment(p, capsule.endpoint_a, capsule.endpoint_b)).norm() - capsule.radius;
}

double body_sdf(const Eigen::Vector3d& p, const CapsuleSet& body) {
  double best = std::numeric_limits<double>::infinity();
  for (const Capsule& c : body.capsules) best = std::min(best, capsule_sdf(p, c));
  return best;
}

Eigen::Vector3d body_sdf_gradient(const Eigen::Vector3d& p, const CapsuleSet& body) {
  constexpr double kTie = 1e-12;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < body.capsules.size(); ++i) {
    const double d = capsule_sdf(p, body.capsules[i]);
    if (d < best_d - kTie) {
      best_d = d;
      best = i;
    }
  }
  const Capsule& c = body.capsules.at(best);
  const Eigen::Vector3d delta = p - closest_point_on_segment(p, c.endpoint_a, c.endpoint_b);
  const double n = delta.norm();
  if (n > kTie) return delta / n;

  const Eigen::Vector3d ab = c.endpoint_b - c.endpoint_a;
  if (ab.squaredNorm() == 0.0) return Eigen::Vector3d::UnitX();
  const Eigen::Vector3d axis = ab.normalized();
  Eigen::Vector3d dir = Eigen::Vector3d::UnitX() - axis.x() * axis;
  if (dir.norm() < 1e-6) dir = Eigen::Vector3d::UnitY() - axis.y() * axis;
  return dir.normalized();
}

Aabb capsule_bounds(const Capsule& capsule) {
  const Eigen::Vector3d r = Eigen::Vector3d::Constant(capsule.radius);
  return {capsule.endpoint_a.cwiseMin(capsule.endpoint_b) - r, capsule.endpoint_a.cwiseMax(capsule.endpoint_b) + r};
}

Aabb body_bounds(const CapsuleSet& body) {
  Aabb box{Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity()),
           Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity())};
  for (const Capsule& c : body.capsules) box = Aabb::merge(box, capsule_bounds(c));
  return box;
}

double capsule_volume(double radius, double length) {
  return std::numbers::pi * radius * radius * length + 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
}

}  // namespace arflow
