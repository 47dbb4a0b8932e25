#include "nanomap/point_cloud.hpp"

#include <stdexcept>

namespace nanomap {

PointCloud::PointCloud(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("PointCloud: non-positive grid dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  xs_.assign(n, 0.0);
  ys_.assign(n, 0.0);
  zs_.assign(n, 0.0);
  valid_.assign(n, 0);
}

void PointCloud::set_point(int row, int col, const Eigen::Vector3d& p) {
  const std::size_t i = index(row, col);
  if (!valid_[i]) ++valid_count_;
  xs_[i] = p.x();
  ys_[i] = p.y();
  zs_[i] = p.z();
  valid_[i] = 1;
}

void PointCloud::set_invalid(int row, int col) {
  const std::size_t i = index(row, col);
  if (valid_[i]) --valid_count_;
  xs_[i] = ys_[i] = zs_[i] = 0.0;
  valid_[i] = 0;
}

void PointCloud::validate() const {
  const std::size_t n = static_cast<std::size_t>(rows_) * cols_;
  if (xs_.size() != n || ys_.size() != n || zs_.size() != n ||
      valid_.size() != n) {
    throw std::invalid_argument("PointCloud: grid size mismatch");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid_[i]) continue;
    ++count;
    if (!(zs_[i] > 0.0)) {
      throw std::invalid_argument("PointCloud: valid point with z <= 0");
    }
  }
  if (count != valid_count_) {
    throw std::invalid_argument("PointCloud: valid count out of sync");
  }
}

}  // namespace nanomap
