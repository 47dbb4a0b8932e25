#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace nanomap {

/// Organized depth-camera point cloud: a rows x cols grid of sensor-frame
/// points in row-major order. Pixels without a depth return are invalid but
/// keep their grid slot so that (row, col) lookup stays O(1). Coordinates
/// are stored as structure-of-arrays, which the bulk kernels rely on.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return xs_.size(); }
  std::size_t valid_count() const { return valid_count_; }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols_ + col;
  }

  bool is_valid(std::size_t i) const { return valid_[i] != 0; }

  Eigen::Vector3d point(std::size_t i) const {
    return {xs_[i], ys_[i], zs_[i]};
  }

  /// Depth (sensor z) at a pixel, or a negative value when there is no return.
  double depth_at(int row, int col) const {
    const std::size_t i = index(row, col);
    return valid_[i] ? zs_[i] : -1.0;
  }

  void set_point(int row, int col, const Eigen::Vector3d& p);
  void set_invalid(int row, int col);

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  const std::vector<double>& zs() const { return zs_; }
  const std::vector<std::uint8_t>& validity() const { return valid_; }

  /// Grid shape and the z > 0 requirement on valid points; throws
  /// std::invalid_argument on violation.
  void validate() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::size_t valid_count_ = 0;
  std::vector<double> xs_, ys_, zs_;
  std::vector<std::uint8_t> valid_;
};

}  // namespace nanomap
