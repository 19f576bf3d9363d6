#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "arflow/capsule.hpp"

namespace arflow {

inline constexpr double kDefaultVoxelSize = 0.02;
inline constexpr std::int64_t kDefaultMaxVoxels = 100'000'000;

/// Dense occupancy grid aligned to the world lattice of spacing voxel_size.
/// Voxel (i, j, k) has center (lattice_origin + idx + 0.5) * voxel_size, and
/// origin == lattice_origin * voxel_size.
struct VoxelGrid {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::array<std::int64_t, 3> lattice_origin{0, 0, 0};
  double voxel_size = kDefaultVoxelSize;
  std::array<int, 3> dims{0, 0, 0};
  std::vector<std::uint8_t> occupancy;

  std::int64_t voxel_count() const {
    return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
  }
  std::int64_t occupied_count() const;
  double volume() const;
  Aabb bounds() const;
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k;
  }
};

/// Snaps `box` outward to the world lattice of spacing voxel_size, padded by
/// `pad_voxels` cells on every side.
Aabb snap_to_lattice(const Aabb& box, double voxel_size, int pad_voxels);

/// Grid bounds shared by two bodies: union of their bounds padded by one voxel.
Aabb shared_grid_bounds(const CapsuleSet& a, const CapsuleSet& b, double voxel_size);

/// A voxel is occupied iff body_sdf at its center is < 0. Bounds are snapped
/// to the world lattice; they must enclose the body (InvalidConfig otherwise).
/// Throws GridTooLarge when the voxel count would exceed max_voxels.
VoxelGrid voxelize(const CapsuleSet& body, double voxel_size, const Aabb& bounds,
                   std::int64_t max_voxels = kDefaultMaxVoxels);

/// Auto bounds: the body's own bounds padded by one voxel.
VoxelGrid voxelize(const CapsuleSet& body, double voxel_size, std::int64_t max_voxels = kDefaultMaxVoxels);

/// Volume occupied in both grids (m^3). Throws GridMismatch unless the grids
/// share origin, voxel size, and dims.
double intersection_volume_frame(const VoxelGrid& a, const VoxelGrid& b);

/// Same value as voxelizing both bodies on shared_grid_bounds and calling
/// intersection_volume_frame, evaluated only over the overlap of the two
/// bodies' bounds.
double body_intersection_volume(const CapsuleSet& a, const CapsuleSet& b, double voxel_size,
                                std::int64_t max_voxels = kDefaultMaxVoxels);

}  // namespace arflow
