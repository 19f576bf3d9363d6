#pragma once

#include <vector>

#include <Eigen/Core>

#include "arflow/motion.hpp"
#include "arflow/skeleton.hpp"

namespace arflow {

struct Capsule {
  Eigen::Vector3d endpoint_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d endpoint_b = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// World-space capsules of one body in one frame, one per bone.
struct CapsuleSet {
  std::vector<Capsule> capsules;
};

struct Aabb {
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  Eigen::Vector3d hi = Eigen::Vector3d::Zero();

  bool empty() const { return (hi.array() < lo.array()).any(); }
  bool contains(const Aabb& other) const {
    return (lo.array() <= other.lo.array()).all() && (other.hi.array() <= hi.array()).all();
  }
  static Aabb merge(const Aabb& a, const Aabb& b);
  static Aabb intersect(const Aabb& a, const Aabb& b);
};

CapsuleSet body_capsules(const Skeleton& skel, const BodyPoseFrame& frame);
CapsuleSet body_capsules(const Skeleton& skel, const MotionTensor& motion, int h);

/// Closest point on segment [a, b] to p. A zero-length segment yields a.
Eigen::Vector3d closest_point_on_segment(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                         const Eigen::Vector3d& b);

double capsule_sdf(const Eigen::Vector3d& p, const Capsule& capsule);

/// Minimum over capsules of (axis distance - radius). Negative inside.
double body_sdf(const Eigen::Vector3d& p, const CapsuleSet& body);

/// Unit vector from the nearest axis point toward p. Ties within 1e-12
/// resolve to the lowest capsule index; a point on the axis gets +x projected
/// perpendicular to the axis (+y if the axis is along x).
Eigen::Vector3d body_sdf_gradient(const Eigen::Vector3d& p, const CapsuleSet& body);

Aabb capsule_bounds(const Capsule& capsule);
Aabb body_bounds(const CapsuleSet& body);

double capsule_volume(double radius, double length);

}  // namespace arflow
