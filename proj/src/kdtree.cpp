#include "nanomap/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nanomap/kernels.hpp"

namespace nanomap {

double KdTree::Entry::distance() const { return std::sqrt(dist_sq); }

KdTree KdTree::build(std::shared_ptr<const PointCloud> cloud, int leaf_size) {
  if (!cloud) throw std::invalid_argument("KdTree::build: null cloud");
  if (leaf_size < 1) throw std::invalid_argument("KdTree::build: leaf_size < 1");
  KdTree tree;
  tree.cloud_ = std::move(cloud);
  tree.leaf_size_ = leaf_size;

  const PointCloud& pc = *tree.cloud_;
  tree.items_.reserve(pc.valid_count());
  const auto& xs = pc.xs();
  const auto& ys = pc.ys();
  const auto& zs = pc.zs();
  for (std::uint32_t i = 0; i < pc.size(); ++i) {
    if (!pc.is_valid(i)) continue;
    tree.items_.push_back(Item{static_cast<float>(xs[i]),
                               static_cast<float>(ys[i]),
                               static_cast<float>(zs[i]), i});
  }
  if (!tree.items_.empty()) {
    tree.nodes_.reserve(2 * tree.items_.size() / leaf_size + 2);
    tree.build_node(0, static_cast<std::uint32_t>(tree.items_.size()));
  }
  return tree;
}

std::uint32_t KdTree::build_node(std::uint32_t begin, std::uint32_t end) {
  const std::uint32_t node_index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  float mins[3], maxs[3];
  kernels::minmax3_strided(reinterpret_cast<const float*>(items_.data() + begin),
                           end - begin, mins, maxs);
  {
    Node& node = nodes_[node_index];
    for (int a = 0; a < 3; ++a) {
      // Item coordinates are rounded-to-nearest floats of the double points;
      // pad by one ulp so the box bounds the doubles too.
      node.bmin[a] = std::nextafterf(mins[a], -std::numeric_limits<float>::infinity());
      node.bmax[a] = std::nextafterf(maxs[a], std::numeric_limits<float>::infinity());
    }
  }

  if (end - begin <= static_cast<std::uint32_t>(leaf_size_)) {
    Node& node = nodes_[node_index];
    node.leaf = 1;
    node.a = begin;
    node.b = end;
    return node_index;
  }

  int axis = 0;
  {
    const Node& node = nodes_[node_index];
    float widest = node.bmax[0] - node.bmin[0];
    for (int a = 1; a < 3; ++a) {
      const float extent = node.bmax[a] - node.bmin[a];
      if (extent > widest) {
        widest = extent;
        axis = a;
      }
    }
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  const auto coord = [axis](const Item& it) {
    return axis == 0 ? it.x : (axis == 1 ? it.y : it.z);
  };
  std::nth_element(items_.begin() + begin, items_.begin() + mid,
                   items_.begin() + end, [&](const Item& a, const Item& b) {
                     const float ca = coord(a), cb = coord(b);
                     if (ca != cb) return ca < cb;
                     return a.idx < b.idx;
                   });

  const std::uint32_t left = build_node(begin, mid);
  const std::uint32_t right = build_node(mid, end);
  Node& node = nodes_[node_index];
  node.a = left;
  node.b = right;
  return node_index;
}

namespace {

struct Candidate {
  double dist_sq;
  std::uint32_t index;

  bool operator<(const Candidate& o) const {
    if (dist_sq != o.dist_sq) return dist_sq < o.dist_sq;
    return index < o.index;
  }
};

double box_dist_sq(const float bmin[3], const float bmax[3],
                   const Eigen::Vector3d& q) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double d = 0.0;
    if (q[a] < bmin[a]) {
      d = bmin[a] - q[a];
    } else if (q[a] > bmax[a]) {
      d = q[a] - bmax[a];
    }
    d2 += d * d;
  }
  return d2;
}

}  // namespace

std::vector<KdTree::Entry> KdTree::knn(const Eigen::Vector3d& query,
                                       std::size_t k) const {
  if (k < 1) throw std::invalid_argument("KdTree::knn: k < 1");
  std::vector<Entry> result;
  if (items_.empty()) return result;

  const auto& xs = cloud_->xs();
  const auto& ys = cloud_->ys();
  const auto& zs = cloud_->zs();
  const double qx = query.x(), qy = query.y(), qz = query.z();

  // Max-heap of the k best candidates ordered by (dist_sq, grid index);
  // the top is the current worst.
  std::vector<Candidate> heap;
  heap.reserve(k + 1);

  const auto consider = [&](std::uint32_t idx) {
    const double dx = xs[idx] - qx;
    const double dy = ys[idx] - qy;
    const double dz = zs[idx] - qz;
    // Keep this association in sync with the brute-force scans in the tests.
    const Candidate c{(dx * dx + dy * dy) + dz * dz, idx};
    if (heap.size() < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end());
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end());
    }
  };

  // Iterative best-first descent with an explicit stack.
  struct Visit {
    std::uint32_t node;
    double bound;
  };
  std::vector<Visit> stack;
  stack.push_back({0, box_dist_sq(nodes_[0].bmin, nodes_[0].bmax, query)});
  while (!stack.empty()) {
    const Visit visit = stack.back();
    stack.pop_back();
    // Prune on strictly-greater only: an equal bound can still hide a
    // candidate that wins the index tie-break.
    if (heap.size() == k && visit.bound > heap.front().dist_sq) continue;
    const Node& node = nodes_[visit.node];
    if (node.leaf) {
      for (std::uint32_t i = node.a; i < node.b; ++i) consider(items_[i].idx);
      continue;
    }
    const Node& left = nodes_[node.a];
    const Node& right = nodes_[node.b];
    const double dl = box_dist_sq(left.bmin, left.bmax, query);
    const double dr = box_dist_sq(right.bmin, right.bmax, query);
    // Push the farther child first so the nearer one is visited next.
    if (dl <= dr) {
      stack.push_back({node.b, dr});
      stack.push_back({node.a, dl});
    } else {
      stack.push_back({node.a, dl});
      stack.push_back({node.b, dr});
    }
  }

  std::sort(heap.begin(), heap.end());
  result.reserve(heap.size());
  for (const Candidate& c : heap) {
    result.push_back(Entry{cloud_->point(c.index), c.dist_sq, c.index});
  }
  return result;
}

std::vector<std::uint32_t> KdTree::indexed_points() const {
  std::vector<std::uint32_t> out;
  out.reserve(items_.size());
  for (const Item& it : items_) out.push_back(it.idx);
  return out;
}

}  // namespace nanomap
