#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "nanomap/geometry.hpp"
#include "nanomap/point_cloud.hpp"

namespace nanomap {

/// Naive fused world-frame occupancy map: every cloud is transformed into
/// the world frame and quantized into voxel cells. Incorporating corrected
/// poses requires re-fusing every logged cloud - the cost the pose-update
/// benchmark measures. No free-space carving, no log-odds.
///
/// Single writer for fuse/rebuild; concurrent nearest_occupied reads are
/// safe between writes.
class VoxelMap {
 public:
  struct Config {
    double voxel_size = 0.25;
    /// A cell is occupied once at least this many points fell in it.
    std::uint32_t hit_threshold = 1;
  };

  struct LogEntry {
    double timestamp = 0.0;
    RigidTransform world_pose;  // sensor-to-world used at fusion
    std::shared_ptr<const PointCloud> cloud;
  };

  struct Nearest {
    Eigen::Vector3i cell;
    Eigen::Vector3d center;
    double distance = 0.0;
  };

  explicit VoxelMap(Config config = {});

  /// Transforms all valid points of the cloud by `world_pose`, quantizes and
  /// counts them, and appends the cloud to the insertion log.
  void fuse(std::shared_ptr<const PointCloud> cloud,
            const RigidTransform& world_pose, double timestamp);

  /// Closest occupied cell center to the query point, exact; ties broken by
  /// lexicographic cell coordinates. Throws std::runtime_error when empty.
  Nearest nearest_occupied(const Eigen::Vector3d& query) const;

  /// Re-fuses every logged cloud with its sensor pose interpolated from the
  /// corrected sequence (same sensor-to-world kind as fuse's pose). Throws
  /// std::runtime_error naming the first cloud whose timestamp the
  /// corrections do not cover.
  void rebuild(std::span<const TimedPose> corrected_poses);

  std::size_t occupied_count() const;
  bool empty() const { return occupied_count() == 0; }
  const std::vector<LogEntry>& log() const { return log_; }
  const Config& config() const { return config_; }

  /// Occupied cells in lexicographic order (for oracle tests).
  std::vector<Eigen::Vector3i> occupied_cells() const;

  Eigen::Vector3d cell_center(const Eigen::Vector3i& cell) const;
  Eigen::Vector3i quantize(const Eigen::Vector3d& p) const;

 private:
  void fuse_points(const PointCloud& cloud, const RigidTransform& world_pose);

  Config config_;
  double inv_voxel_ = 4.0;
  std::unordered_map<std::int64_t, std::uint32_t> counts_;
  std::size_t occupied_ = 0;
  std::vector<LogEntry> log_;
  // Scratch buffers reused across fuse calls.
  std::vector<double> sx_, sy_, sz_;
  std::vector<std::int32_t> cx_, cy_, cz_;
};

}  // namespace nanomap
