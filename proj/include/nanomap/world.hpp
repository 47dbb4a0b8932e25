#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace nanomap {

/// Static scene made of axis-aligned boxes and spheres (world frame).
struct World {
  struct Box {
    Eigen::Vector3d min;
    Eigen::Vector3d max;
  };
  struct Sphere {
    Eigen::Vector3d center;
    double radius = 1.0;
  };

  std::vector<Box> boxes;
  std::vector<Sphere> spheres;

  bool empty() const { return boxes.empty() && spheres.empty(); }

  /// Throws std::invalid_argument when a shape has non-positive extent.
  void validate() const;

  /// Smallest ray parameter t > 0 with origin + t * dir on a shape surface.
  std::optional<double> raycast(const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir) const;

  /// Signed distance to the union of shapes (negative inside).
  double signed_distance(const Eigen::Vector3d& p) const;

  /// Closest point on any shape surface. Requires a non-empty world.
  Eigen::Vector3d closest_surface_point(const Eigen::Vector3d& p) const;
};

}  // namespace nanomap
