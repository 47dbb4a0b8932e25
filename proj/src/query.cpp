#include "nanomap/query.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace nanomap {

const char* to_string(FovClassification c) {
  switch (c) {
    case FovClassification::free_space: return "free_space";
    case FovClassification::outside_lateral: return "outside_lateral";
    case FovClassification::outside_vertical: return "outside_vertical";
    case FovClassification::occluded: return "occluded";
    case FovClassification::beyond_horizon: return "beyond_horizon";
    case FovClassification::behind_sensor: return "behind_sensor";
  }
  return "unknown";
}

namespace {

// Worst-case value of n . p over the box: n . c + |n| . h.
double box_max_along(const Eigen::Vector3d& n, const Aabb& box) {
  return n.dot(box.center) + n.cwiseAbs().dot(box.half_widths);
}

double box_min_along(const Eigen::Vector3d& n, const Aabb& box) {
  return n.dot(box.center) - n.cwiseAbs().dot(box.half_widths);
}

}  // namespace

FovClassification is_in_fov(const SensorFrame& frame, const GaussianPoint& p,
                            double occlusion_margin) {
  const CameraModel& cam = frame.camera;
  const Aabb box = one_sigma_aabb(p);

  // Near plane; also catches z <= 0 (degenerate projection).
  const Eigen::Vector3d forward(0.0, 0.0, 1.0);
  if (box_min_along(forward, box) < cam.min_range) {
    return FovClassification::behind_sensor;
  }

  // Image-boundary planes through the pinhole: u >= 0 is K_row0 . p >= 0,
  // u <= cols is (K_row0 - cols * K_row2) . p <= 0; likewise for v.
  const Eigen::Vector3d k0 = cam.intrinsics.row(0);
  const Eigen::Vector3d k1 = cam.intrinsics.row(1);
  const Eigen::Vector3d k2 = cam.intrinsics.row(2);
  if (box_min_along(k0, box) < 0.0 ||
      box_max_along(k0 - cam.cols * k2, box) > 0.0) {
    return FovClassification::outside_lateral;
  }
  if (box_min_along(k1, box) < 0.0 ||
      box_max_along(k1 - cam.rows * k2, box) > 0.0) {
    return FovClassification::outside_vertical;
  }

  if (box_max_along(forward, box) > cam.max_range) {
    return FovClassification::beyond_horizon;
  }

  // Occlusion check of the mean point only. AABB containment implies the
  // mean projects inside the image; clamp guards the u == cols boundary.
  const Projection proj = project(cam, p.mean);
  const int col = std::clamp(static_cast<int>(std::floor(proj.u)), 0,
                             cam.cols - 1);
  const int row = std::clamp(static_cast<int>(std::floor(proj.v)), 0,
                             cam.rows - 1);
  const double measured = frame.cloud->depth_at(row, col);
  if (measured >= 0.0 && measured < p.mean.z() - occlusion_margin) {
    return FovClassification::occluded;
  }
  return FovClassification::free_space;
}

QueryResult nanomap_query(const FrameChain& chain, const GaussianPoint& query,
                          std::size_t k) {
  if (chain.empty()) {
    throw std::runtime_error("nanomap_query: chain holds no sensor data");
  }
  if (k < 1) throw std::invalid_argument("nanomap_query: k < 1");
  query.validate();

  const double occlusion_margin = chain.config().occlusion_margin;
  const auto& pairs = chain.pairs();

  QueryResult result;
  GaussianPoint in_frame = transform_gaussian(chain.body_edge(), query);
  GaussianPoint in_frame0 = in_frame;

  std::size_t index = 0;
  for (auto it = pairs.begin(); it != pairs.end(); ++it, ++index) {
    result.search_depth = index + 1;
    if (is_in_fov(it->frame, in_frame, occlusion_margin) ==
        FovClassification::free_space) {
      result.frame_index = index;
      result.query_in_frame = in_frame;
      result.neighbors = it->frame.tree.knn(in_frame.mean, k);
      return result;
    }
    if (it->edge_to_older.has_value()) {
      in_frame = transform_gaussian(*it->edge_to_older, in_frame);
    }
  }

  // No view contains the query: flag it and answer from the newest frame.
  result.frame_index.reset();
  result.query_in_frame = in_frame0;
  result.neighbors = pairs.front().frame.tree.knn(in_frame0.mean, k);
  return result;
}

std::vector<Eigen::Vector3d> neighbors_in_body_frame(
    const FrameChain& chain, const QueryResult& result) {
  if (result.neighbors.empty()) return {};
  const std::size_t frame_index = result.frame_index.value_or(0);
  if (frame_index >= chain.size()) {
    throw std::out_of_range("neighbors_in_body_frame: stale frame index");
  }

  // Compose body -> S_i, then map neighbors back through the inverse.
  RigidTransform body_to_frame = chain.body_edge().transform;
  auto it = chain.pairs().begin();
  for (std::size_t i = 0; i < frame_index; ++i, ++it) {
    body_to_frame = compose(it->edge_to_older->transform, body_to_frame);
  }
  const RigidTransform frame_to_body = body_to_frame.inverse();

  std::vector<Eigen::Vector3d> out;
  out.reserve(result.neighbors.size());
  for (const KdTree::Entry& e : result.neighbors) {
    out.push_back(frame_to_body.apply(e.point));
  }
  return out;
}

std::vector<QueryResult> batch_query(const FrameChain& chain,
                                     std::span<const GaussianPoint> queries,
                                     std::size_t k, bool parallel) {
  std::vector<QueryResult> results(queries.size());
  if (!parallel || queries.size() < 2) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      results[i] = nanomap_query(chain, queries[i], k);
    }
    return results;
  }
  const std::size_t hw = std::max<std::size_t>(std::thread::hardware_concurrency(), 1);
  const std::size_t workers = std::min(hw, queries.size());
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < queries.size(); i += workers) {
        results[i] = nanomap_query(chain, queries[i], k);
      }
    });
  }
  for (std::thread& t : threads) t.join();
  return results;
}

}  // namespace nanomap
