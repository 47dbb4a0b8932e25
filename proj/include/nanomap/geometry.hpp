#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

namespace nanomap {

/// Rigid body transform: p' = rotation * p + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  /// Checks orthonormality and det(+1) to 1e-9; throws std::invalid_argument.
  void validate() const;
};

/// compose(a, b) applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Relative transform with Gaussian translational uncertainty and known rotation.
struct TransformEdge {
  RigidTransform transform;
  Eigen::Matrix3d translation_covariance = Eigen::Matrix3d::Zero();

  TransformEdge() = default;
  TransformEdge(const RigidTransform& t, const Eigen::Matrix3d& cov);

  /// Symmetry within 1e-12, eigenvalues >= -1e-12; throws std::invalid_argument.
  void validate() const;
};

/// A 3D point with mean and translational covariance.
struct GaussianPoint {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();

  GaussianPoint() = default;
  GaussianPoint(const Eigen::Vector3d& m, const Eigen::Matrix3d& cov);

  void validate() const;
};

/// Pinhole depth camera. Sensor frame is right-down-forward, pixel (u, v)
/// with u along columns, v along rows. K's last row must be (0, 0, 1).
struct CameraModel {
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  int rows = 0;
  int cols = 0;
  double min_range = 0.2;
  double max_range = 10.0;

  double fx() const { return intrinsics(0, 0); }
  double fy() const { return intrinsics(1, 1); }
  double cx() const { return intrinsics(0, 2); }
  double cy() const { return intrinsics(1, 2); }

  /// Build from horizontal/vertical full FOV angles in degrees, principal
  /// point at the image center.
  static CameraModel from_fov(int rows, int cols, double hfov_deg,
                              double vfov_deg, double min_range,
                              double max_range);

  void validate() const;
};

/// Axis-aligned box given by center and non-negative half widths.
struct Aabb {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_widths = Eigen::Vector3d::Zero();
};

struct TimedPose {
  double time = 0.0;
  RigidTransform pose;  // world frame
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;  // may be <= 0; caller classifies degenerate projections
};

/// Pixel coordinates of a sensor-frame point: (x, y, z) = K * p, (u, v) = (x/z, y/z).
Projection project(const CameraModel& camera, const Eigen::Vector3d& point);

/// mean' = R * mean + t, covariance' = edge_cov + R * cov * R^T.
GaussianPoint transform_gaussian(const TransformEdge& edge,
                                 const GaussianPoint& p);

/// Tight axis-aligned box of the one-standard-deviation ellipsoid:
/// half width along axis i is sqrt(cov(i, i)).
Aabb one_sigma_aabb(const GaussianPoint& p);

/// Linear translation, constant-angular-velocity rotation interpolation.
/// Requires a.time < b.time and t within [a.time, b.time]; never extrapolates.
RigidTransform interpolate_pose(const TimedPose& a, const TimedPose& b,
                                double t);

/// Interpolates inside a time-ordered pose sequence. Throws std::out_of_range
/// when t is not bracketed.
RigidTransform interpolate_pose_sequence(const std::vector<TimedPose>& poses,
                                         double t);

}  // namespace nanomap
