#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "nanomap/point_cloud.hpp"

namespace nanomap {

/// Balanced k-d tree over the valid points of one organized cloud. Median
/// split on the widest axis, ties broken by original grid index so that
/// builds and queries are fully deterministic. Immutable after build; safe
/// to query from multiple threads.
///
/// Node bounds are kept in float, rounded outward to cover the double
/// coordinates, and all distances are evaluated in double straight from the
/// cloud, so results match a brute-force scan exactly.
class KdTree {
 public:
  struct Entry {
    Eigen::Vector3d point;
    double dist_sq = 0.0;
    std::uint32_t grid_index = 0;

    double distance() const;
  };

  KdTree() = default;

  static KdTree build(std::shared_ptr<const PointCloud> cloud,
                      int leaf_size = 16);

  /// The k nearest valid points, ascending by (distance, grid index).
  /// Returns fewer than k entries only when the tree holds fewer points.
  std::vector<Entry> knn(const Eigen::Vector3d& query, std::size_t k) const;

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const PointCloud* cloud() const { return cloud_.get(); }

  /// Grid indices in tree order; exposed for structural tests.
  std::vector<std::uint32_t> indexed_points() const;

 private:
  struct Item {
    float x, y, z;
    std::uint32_t idx;
  };
  static_assert(sizeof(Item) == 16);

  struct Node {
    float bmin[3];
    float bmax[3];
    std::uint32_t a = 0;  // leaf: item range begin; internal: left child
    std::uint32_t b = 0;  // leaf: item range end;   internal: right child
    std::uint8_t leaf = 0;
  };

  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end);

  std::shared_ptr<const PointCloud> cloud_;
  std::vector<Item> items_;
  std::vector<Node> nodes_;
  int leaf_size_ = 16;
};

}  // namespace nanomap
