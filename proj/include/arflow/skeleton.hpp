#pragma once

#include <vector>

#include <Eigen/Core>

namespace arflow {

/// Kinematic tree. Joint 0 is the root (parent -1); every other joint has a
/// parent with a smaller index. capsule_radius[j] is the radius of the bone
/// ending at joint j; the root entry is kept for layout symmetry and must be
/// positive as well.
struct Skeleton {
  std::vector<int> parent;
  std::vector<Eigen::Vector3d> bone_offset;
  std::vector<double> capsule_radius;

  int joint_count() const { return static_cast<int>(parent.size()); }
  int bone_count() const { return joint_count() - 1; }

  /// Per-frame motion width: 6 per joint rotation, 6 for the root, 3 for translation.
  int frame_dim() const { return 6 * (joint_count() + 1) + 3; }

  /// Throws InvalidConfig when the tree or radius invariants fail.
  void validate() const;

  /// Five-joint upper body: pelvis, chest, head, shoulder, hand. Faces +x,
  /// the arm hangs along -y. Radii span 0.05-0.12 m.
  static Skeleton desk_default();

  /// Straight chain of `joints` joints, each offset `offset` from its parent.
  static Skeleton chain(int joints, const Eigen::Vector3d& offset, double radius);

  bool operator==(const Skeleton&) const = default;
};

}  // namespace arflow
