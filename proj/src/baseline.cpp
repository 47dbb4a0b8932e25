#include "nanomap/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nanomap/kernels.hpp"

namespace nanomap {

namespace {

constexpr int kKeyBits = 21;
constexpr std::int64_t kKeyMask = (std::int64_t{1} << kKeyBits) - 1;
constexpr std::int32_t kCoordLimit = 1 << (kKeyBits - 1);

std::int64_t pack_key(std::int32_t x, std::int32_t y, std::int32_t z) {
  return (static_cast<std::int64_t>(x) & kKeyMask) |
         ((static_cast<std::int64_t>(y) & kKeyMask) << kKeyBits) |
         ((static_cast<std::int64_t>(z) & kKeyMask) << (2 * kKeyBits));
}

std::int32_t sign_extend(std::int64_t v) {
  v &= kKeyMask;
  if (v >= (std::int64_t{1} << (kKeyBits - 1))) v -= (std::int64_t{1} << kKeyBits);
  return static_cast<std::int32_t>(v);
}

Eigen::Vector3i unpack_key(std::int64_t key) {
  return {sign_extend(key), sign_extend(key >> kKeyBits),
          sign_extend(key >> (2 * kKeyBits))};
}

}  // namespace

VoxelMap::VoxelMap(Config config) : config_(config) {
  if (config_.voxel_size <= 0.0) {
    throw std::invalid_argument("VoxelMap: voxel_size must be > 0");
  }
  if (config_.hit_threshold < 1) {
    throw std::invalid_argument("VoxelMap: hit_threshold must be >= 1");
  }
  inv_voxel_ = 1.0 / config_.voxel_size;
}

Eigen::Vector3i VoxelMap::quantize(const Eigen::Vector3d& p) const {
  return {static_cast<std::int32_t>(std::floor(p.x() * inv_voxel_)),
          static_cast<std::int32_t>(std::floor(p.y() * inv_voxel_)),
          static_cast<std::int32_t>(std::floor(p.z() * inv_voxel_))};
}

Eigen::Vector3d VoxelMap::cell_center(const Eigen::Vector3i& cell) const {
  return (cell.cast<double>() + Eigen::Vector3d::Constant(0.5)) *
         config_.voxel_size;
}

void VoxelMap::fuse_points(const PointCloud& cloud,
                           const RigidTransform& world_pose) {
  const std::size_t n = cloud.size();
  sx_.resize(n);
  sy_.resize(n);
  sz_.resize(n);
  cx_.resize(n);
  cy_.resize(n);
  cz_.resize(n);

  double r[9], t[3];
  Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(r) =
      world_pose.rotation;
  Eigen::Map<Eigen::Vector3d>(t) = world_pose.translation;
  kernels::transform_points(r, t, cloud.xs().data(), cloud.ys().data(),
                            cloud.zs().data(), n, sx_.data(), sy_.data(),
                            sz_.data());
  kernels::quantize_floor(sx_.data(), n, inv_voxel_, cx_.data());
  kernels::quantize_floor(sy_.data(), n, inv_voxel_, cy_.data());
  kernels::quantize_floor(sz_.data(), n, inv_voxel_, cz_.data());

  const auto& valid = cloud.validity();
  counts_.reserve(counts_.size() + n / 8);
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    if (std::abs(cx_[i]) >= kCoordLimit || std::abs(cy_[i]) >= kCoordLimit ||
        std::abs(cz_[i]) >= kCoordLimit) {
      throw std::runtime_error("VoxelMap: point outside addressable volume");
    }
    std::uint32_t& count = counts_[pack_key(cx_[i], cy_[i], cz_[i])];
    ++count;
    if (count == config_.hit_threshold) ++occupied_;
  }
}

void VoxelMap::fuse(std::shared_ptr<const PointCloud> cloud,
                    const RigidTransform& world_pose, double timestamp) {
  if (!cloud) throw std::invalid_argument("VoxelMap::fuse: null cloud");
  fuse_points(*cloud, world_pose);
  log_.push_back(LogEntry{timestamp, world_pose, std::move(cloud)});
}

VoxelMap::Nearest VoxelMap::nearest_occupied(const Eigen::Vector3d& query) const {
  if (occupied_ == 0) {
    throw std::runtime_error("VoxelMap::nearest_occupied: map is empty");
  }

  const double voxel = config_.voxel_size;
  const Eigen::Vector3i qcell = quantize(query);

  struct Best {
    double dist_sq = std::numeric_limits<double>::infinity();
    Eigen::Vector3i cell{0, 0, 0};
    bool found = false;
  } best;

  const auto consider = [&](const Eigen::Vector3i& cell) {
    const auto it = counts_.find(pack_key(cell.x(), cell.y(), cell.z()));
    if (it == counts_.end() || it->second < config_.hit_threshold) return;
    const Eigen::Vector3d center =
        (cell.cast<double>() + Eigen::Vector3d::Constant(0.5)) * voxel;
    const Eigen::Vector3d d = center - query;
    const double dist_sq = d.squaredNorm();
    if (!best.found || dist_sq < best.dist_sq ||
        (dist_sq == best.dist_sq &&
         std::lexicographical_compare(cell.data(), cell.data() + 3,
                                      best.cell.data(), best.cell.data() + 3))) {
      best.dist_sq = dist_sq;
      best.cell = cell;
      best.found = true;
    }
  };

  // Expanding Chebyshev shells around the query cell; a cell on shell s has
  // its center at least (s - 0.5) * voxel away, which bounds termination.
  const int shell_cap = 64;
  for (int s = 0;; ++s) {
    if (best.found) {
      const double reachable = (s - 0.5) * voxel;
      if (reachable > 0.0 && reachable * reachable > best.dist_sq) break;
    }
    if (s > shell_cap) break;  // sparse far-away maps: finish by full scan
    if (s == 0) {
      consider(qcell);
      continue;
    }
    for (int dx = -s; dx <= s; ++dx) {
      for (int dy = -s; dy <= s; ++dy) {
        const bool rim = std::abs(dx) == s || std::abs(dy) == s;
        if (rim) {
          for (int dz = -s; dz <= s; ++dz) {
            consider(qcell + Eigen::Vector3i(dx, dy, dz));
          }
        } else {
          consider(qcell + Eigen::Vector3i(dx, dy, -s));
          consider(qcell + Eigen::Vector3i(dx, dy, s));
        }
      }
    }
  }

  if (!best.found) {
    // Query far outside the populated region; exact fallback scan.
    for (const auto& [key, count] : counts_) {
      if (count < config_.hit_threshold) continue;
      consider(unpack_key(key));
    }
  }

  Nearest out;
  out.cell = best.cell;
  out.center = (best.cell.cast<double>() + Eigen::Vector3d::Constant(0.5)) * voxel;
  out.distance = std::sqrt(best.dist_sq);
  return out;
}

void VoxelMap::rebuild(std::span<const TimedPose> corrected_poses) {
  const std::vector<TimedPose> corrected(corrected_poses.begin(),
                                         corrected_poses.end());
  for (const LogEntry& entry : log_) {
    if (corrected.empty() || entry.timestamp < corrected.front().time ||
        entry.timestamp > corrected.back().time) {
      throw std::runtime_error(
          "VoxelMap::rebuild: corrections do not cover cloud at t=" +
          std::to_string(entry.timestamp));
    }
  }
  counts_.clear();
  occupied_ = 0;
  for (LogEntry& entry : log_) {
    entry.world_pose = interpolate_pose_sequence(corrected, entry.timestamp);
    fuse_points(*entry.cloud, entry.world_pose);
  }
}

std::size_t VoxelMap::occupied_count() const { return occupied_; }

std::vector<Eigen::Vector3i> VoxelMap::occupied_cells() const {
  std::vector<Eigen::Vector3i> cells;
  cells.reserve(occupied_);
  for (const auto& [key, count] : counts_) {
    if (count >= config_.hit_threshold) cells.push_back(unpack_key(key));
  }
  std::sort(cells.begin(), cells.end(),
            [](const Eigen::Vector3i& a, const Eigen::Vector3i& b) {
              return std::lexicographical_compare(a.data(), a.data() + 3,
                                                  b.data(), b.data() + 3);
            });
  return cells;
}

}  // namespace nanomap
