#pragma once

#include <optional>
#include <vector>

#include "nanomap/chain.hpp"
#include "nanomap/geometry.hpp"

namespace nanomap {

/// Outcome of testing a Gaussian point against one sensor frame's observed
/// free space. Exactly one label; checks run in the fixed order behind,
/// lateral, vertical, horizon, occluded.
enum class FovClassification {
  free_space,
  outside_lateral,
  outside_vertical,
  occluded,
  beyond_horizon,
  behind_sensor,
};

const char* to_string(FovClassification c);

/// free_space iff the 1-sigma AABB of `p` (sensor coordinates) lies inside
/// the frustum (near, lateral, vertical, far planes) and the mean point's
/// pixel passes the occlusion check: measured depth >= mean z - margin.
/// Pixels without a depth return count as free out to max range.
///
/// Every frustum plane is linear in sensor coordinates, so box containment
/// needs one extremal-corner inequality per plane - the same count as
/// testing a single point.
FovClassification is_in_fov(const SensorFrame& frame, const GaussianPoint& p,
                            double occlusion_margin = 0.1);

struct QueryResult {
  /// Index of the frame containing the view; nullopt = out of known space
  /// (neighbors and query_in_frame then refer to frame 0).
  std::optional<std::size_t> frame_index;
  GaussianPoint query_in_frame;
  std::vector<KdTree::Entry> neighbors;
  /// Number of frames examined before answering.
  std::size_t search_depth = 0;
};

/// Reverse search over the view history: transforms the body-frame query
/// through the body edge and then edge by edge into older frames, returning
/// the first frame whose free space contains it, with the k nearest points
/// of that frame. Falls back to frame 0's data flagged out-of-known-space.
/// Throws std::runtime_error on an empty chain.
QueryResult nanomap_query(const FrameChain& chain, const GaussianPoint& query,
                          std::size_t k);

/// Maps a result's neighbors back into the current body frame (order
/// preserved). Out-of-known-space results map through frame 0.
std::vector<Eigen::Vector3d> neighbors_in_body_frame(const FrameChain& chain,
                                                     const QueryResult& result);

/// Evaluates independent queries, optionally fanning out across threads.
/// Results are identical to the sequential evaluation.
std::vector<QueryResult> batch_query(const FrameChain& chain,
                                     std::span<const GaussianPoint> queries,
                                     std::size_t k, bool parallel = false);

}  // namespace nanomap
