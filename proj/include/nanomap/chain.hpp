#pragma once

#include <deque>
#include <list>
#include <memory>
#include <optional>
#include <span>

#include "nanomap/geometry.hpp"
#include "nanomap/kdtree.hpp"
#include "nanomap/point_cloud.hpp"

namespace nanomap {

/// One depth measurement: organized cloud plus its k-d tree and camera.
struct SensorFrame {
  double timestamp = 0.0;
  std::shared_ptr<const PointCloud> cloud;
  KdTree tree;
  CameraModel camera;
};

struct ChainConfig {
  std::size_t capacity = 150;
  /// Default covariance assigned to each inter-frame edge.
  Eigen::Matrix3d edge_sigma = Eigen::Matrix3d::Zero();
  /// Expected cloud period; scales the body edge covariance with the time
  /// elapsed since the newest frame.
  double nominal_frame_period = 1.0 / 30.0;
  /// Sensor extrinsic: maps sensor coordinates into body coordinates.
  RigidTransform mount;
  /// Clouds that arrive before a bracketing pose wait here.
  std::size_t pending_limit = 8;
  /// Poses older than (oldest frame timestamp - margin) are dropped.
  double pose_retention_margin = 1.0;
  /// Depth slack for the mean-point occlusion check.
  double occlusion_margin = 0.1;
  int kdtree_leaf_size = 16;
};

/// The local map: a doubly-linked sequence of edge-vertex pairs, newest
/// first. `edge_to_older` on a pair maps this frame's coordinates into the
/// next older frame's coordinates; the oldest pair has none. The separate
/// body edge maps current body coordinates into the newest frame.
///
/// Single logical writer; any number of concurrent readers between writes.
class FrameChain {
 public:
  struct Pair {
    SensorFrame frame;
    /// Transform into the next older frame; unset on the oldest pair.
    std::optional<TransformEdge> edge_to_older;
    /// World pose of the sensor at capture, refreshed by pose updates.
    RigidTransform world_pose;
  };

  explicit FrameChain(ChainConfig config);

  /// Ingest one pose of the monotone stream; recomputes the body edge and
  /// inserts any parked clouds that became bracketable.
  void add_pose(const TimedPose& pose);

  /// Ingest one cloud. The k-d tree is built immediately; the edge-vertex
  /// pair is linked in O(1) once a bracketing pose exists, otherwise the
  /// frame is parked. Throws if the timestamp is not newer than the newest
  /// frame or precedes the buffered pose span.
  void add_cloud(std::shared_ptr<const PointCloud> cloud, double timestamp,
                 const CameraModel& camera,
                 std::optional<Eigen::Matrix3d> edge_covariance = std::nullopt);

  /// Splices corrected world poses into the buffer and recomputes every
  /// inter-frame edge whose two frame timestamps both lie inside the
  /// corrections' span. Edge covariances are left unchanged. Returns the
  /// number of inter-frame edges recomputed.
  std::size_t apply_pose_updates(std::span<const TimedPose> corrections);

  /// Sets the capacity and drops oldest pairs until the chain fits.
  void trim(std::size_t new_capacity);

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  std::size_t capacity() const { return config_.capacity; }
  const ChainConfig& config() const { return config_; }

  const std::list<Pair>& pairs() const { return pairs_; }
  const TransformEdge& body_edge() const;
  double newest_frame_time() const;

  /// World pose of the i-th newest frame (i = 0 is the newest).
  const RigidTransform& frame_world_pose(std::size_t i) const;

  std::size_t pending_count() const { return pending_.size(); }
  std::size_t dropped_pending_count() const { return dropped_pending_; }
  std::size_t pose_buffer_size() const { return pose_buffer_.size(); }

 private:
  void insert_frame(SensorFrame frame,
                    const std::optional<Eigen::Matrix3d>& edge_covariance);
  void drain_pending();
  void refresh_body_edge();
  void prune_pose_buffer();
  RigidTransform body_pose_at(double t) const;

  struct Pending {
    SensorFrame frame;
    std::optional<Eigen::Matrix3d> edge_covariance;
  };

  ChainConfig config_;
  std::list<Pair> pairs_;  // newest first
  std::deque<TimedPose> pose_buffer_;
  TransformEdge body_edge_;
  bool body_edge_valid_ = false;
  std::deque<Pending> pending_;
  std::size_t dropped_pending_ = 0;
};

}  // namespace nanomap
