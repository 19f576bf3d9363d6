#include "arflow/voxel.hpp"

#include <cmath>
#include <string>

#include "arflow/error.hpp"

namespace arflow {

namespace {

struct LatticeBox {
  std::array<std::int64_t, 3> lo{};  // first cell
  std::array<std::int64_t, 3> hi{};  // one past the last cell

  std::int64_t count() const {
    std::int64_t n = 1;
    for (int a = 0; a < 3; ++a) n *= std::max<std::int64_t>(0, hi[a] - lo[a]);
    return n;
  }
};

LatticeBox lattice_cells(const Aabb& box, double voxel_size, int pad) {
  LatticeBox out;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = static_cast<std::int64_t>(std::floor(box.lo[a] / voxel_size)) - pad;
    out.hi[a] = static_cast<std::int64_t>(std::ceil(box.hi[a] / voxel_size)) + pad;
    if (out.hi[a] <= out.lo[a]) out.hi[a] = out.lo[a] + 1;
  }
  return out;
}

double center(std::int64_t cell, double voxel_size) { return (static_cast<double>(cell) + 0.5) * voxel_size; }

void check_voxel_size(double voxel_size) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw Error(ErrorCode::kInvalidConfig, "voxel_size must be positive and finite");
  }
}

void check_cap(std::int64_t count, std::int64_t max_voxels) {
  if (count > max_voxels) {
    throw Error(ErrorCode::kGridTooLarge,
                std::to_string(count) + " voxels exceeds the cap of " + std::to_string(max_voxels));
  }
}

bool inside_any(const Eigen::Vector3d& p, const CapsuleSet& body) {
  for (const Capsule& c : body.capsules) {
    if (capsule_sdf(p, c) < 0.0) return true;
  }
  return false;
}

}  // namespace

std::int64_t VoxelGrid::occupied_count() const {
  std::int64_t n = 0;
  for (std::uint8_t v : occupancy) n += v;
  return n;
}

double VoxelGrid::volume() const {
  return static_cast<double>(occupied_count()) * voxel_size * voxel_size * voxel_size;
}

Aabb VoxelGrid::bounds() const {
  Aabb box;
  for (int a = 0; a < 3; ++a) {
    box.lo[a] = static_cast<double>(lattice_origin[a]) * voxel_size;
    box.hi[a] = static_cast<double>(lattice_origin[a] + dims[a]) * voxel_size;
  }
  return box;
}

Aabb snap_to_lattice(const Aabb& box, double voxel_size, int pad_voxels) {
  check_voxel_size(voxel_size);
  const LatticeBox cells = lattice_cells(box, voxel_size, pad_voxels);
  Aabb out;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = static_cast<double>(cells.lo[a]) * voxel_size;
    out.hi[a] = static_cast<double>(cells.hi[a]) * voxel_size;
  }
  return out;
}

Aabb shared_grid_bounds(const CapsuleSet& a, const CapsuleSet& b, double voxel_size) {
  return snap_to_lattice(Aabb::merge(body_bounds(a), body_bounds(b)), voxel_size, 1);
}

VoxelGrid voxelize(const CapsuleSet& body, double voxel_size, const Aabb& bounds, std::int64_t max_voxels) {
  check_voxel_size(voxel_size);
  if (body.capsules.empty()) throw Error(ErrorCode::kEmptyInput, "cannot voxelize an empty capsule set");
  if (bounds.empty()) throw Error(ErrorCode::kInvalidConfig, "voxel bounds are empty");
  if (!bounds.contains(body_bounds(body))) {
    throw Error(ErrorCode::kInvalidConfig, "voxel bounds do not enclose the body");
  }
  const LatticeBox cells = lattice_cells(bounds, voxel_size, 0);
  check_cap(cells.count(), max_voxels);

  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  for (int a = 0; a < 3; ++a) {
    grid.lattice_origin[a] = cells.lo[a];
    grid.dims[a] = static_cast<int>(cells.hi[a] - cells.lo[a]);
    grid.origin[a] = static_cast<double>(cells.lo[a]) * voxel_size;
  }
  grid.occupancy.assign(static_cast<std::size_t>(grid.voxel_count()), 0);

  for (const Capsule& c : body.capsules) {
    const LatticeBox local = lattice_cells(capsule_bounds(c), voxel_size, 0);
    std::array<std::int64_t, 3> lo{};
    std::array<std::int64_t, 3> hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(local.lo[a], cells.lo[a]);
      hi[a] = std::min(local.hi[a], cells.hi[a]);
    }
    for (std::int64_t i = lo[0]; i < hi[0]; ++i) {
      for (std::int64_t j = lo[1]; j < hi[1]; ++j) {
        for (std::int64_t k = lo[2]; k < hi[2]; ++k) {
          const Eigen::Vector3d p(center(i, voxel_size), center(j, voxel_size), center(k, voxel_size));
          if (capsule_sdf(p, c) < 0.0) {
            grid.occupancy[grid.index(static_cast<int>(i - cells.lo[0]), static_cast<int>(j - cells.lo[1]),
                                      static_cast<int>(k - cells.lo[2]))] = 1;
          }
        }
      }
    }
  }
  return grid;
}

VoxelGrid voxelize(const CapsuleSet& body, double voxel_size, std::int64_t max_voxels) {
  check_voxel_size(voxel_size);
  if (body.capsules.empty()) throw Error(ErrorCode::kEmptyInput, "cannot voxelize an empty capsule set");
  return voxelize(body, voxel_size, snap_to_lattice(body_bounds(body), voxel_size, 1), max_voxels);
}

double intersection_volume_frame(const VoxelGrid& a, const VoxelGrid& b) {
  if (a.voxel_size != b.voxel_size || a.dims != b.dims || a.lattice_origin != b.lattice_origin ||
      a.origin != b.origin) {
    throw Error(ErrorCode::kGridMismatch, "grids differ in origin, voxel size, or dims");
  }
  std::int64_t both = 0;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) both += a.occupancy[i] & b.occupancy[i];
  return static_cast<double>(both) * a.voxel_size * a.voxel_size * a.voxel_size;
}

double body_intersection_volume(const CapsuleSet& a, const CapsuleSet& b, double voxel_size,
                                std::int64_t max_voxels) {
  check_voxel_size(voxel_size);
  if (a.capsules.empty() || b.capsules.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot voxelize an empty capsule set");
  }
  const Aabb box_a = body_bounds(a);
  const Aabb box_b = body_bounds(b);
  check_cap(lattice_cells(Aabb::merge(box_a, box_b), voxel_size, 1).count(), max_voxels);
  const Aabb overlap = Aabb::intersect(box_a, box_b);
  if (overlap.empty()) return 0.0;

  const LatticeBox cells = lattice_cells(overlap, voxel_size, 0);
  std::int64_t both = 0;
  for (std::int64_t i = cells.lo[0]; i < cells.hi[0]; ++i) {
    for (std::int64_t j = cells.lo[1]; j < cells.hi[1]; ++j) {
      for (std::int64_t k = cells.lo[2]; k < cells.hi[2]; ++k) {
        const Eigen::Vector3d p(center(i, voxel_size), center(j, voxel_size), center(k, voxel_size));
        if (inside_any(p, a) && inside_any(p, b)) ++both;
      }
    }
  }
  return static_cast<double>(both) * voxel_size * voxel_size * voxel_size;
}

}  // namespace arflow
