#include "nanomap/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nanomap {

namespace {

Eigen::Matrix3d symmetrize(const Eigen::Matrix3d& m) {
  return 0.5 * (m + m.transpose());
}

void check_covariance(const Eigen::Matrix3d& cov, const char* what) {
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument(std::string(what) + ": covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov,
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument(std::string(what) +
                                ": covariance has negative eigenvalue");
  }
}

}  // namespace

void RigidTransform::validate() const {
  const Eigen::Matrix3d err =
      rotation * rotation.transpose() - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("RigidTransform: rotation not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("RigidTransform: rotation determinant != +1");
  }
  if (!translation.allFinite()) {
    throw std::invalid_argument("RigidTransform: non-finite translation");
  }
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

TransformEdge::TransformEdge(const RigidTransform& t, const Eigen::Matrix3d& cov)
    : transform(t), translation_covariance(symmetrize(cov)) {}

void TransformEdge::validate() const {
  transform.validate();
  check_covariance(translation_covariance, "TransformEdge");
}

GaussianPoint::GaussianPoint(const Eigen::Vector3d& m, const Eigen::Matrix3d& cov)
    : mean(m), covariance(symmetrize(cov)) {}

void GaussianPoint::validate() const {
  if (!mean.allFinite()) {
    throw std::invalid_argument("GaussianPoint: non-finite mean");
  }
  check_covariance(covariance, "GaussianPoint");
}

CameraModel CameraModel::from_fov(int rows, int cols, double hfov_deg,
                                  double vfov_deg, double min_range,
                                  double max_range) {
  CameraModel cam;
  cam.rows = rows;
  cam.cols = cols;
  cam.min_range = min_range;
  cam.max_range = max_range;
  const double deg = M_PI / 180.0;
  cam.intrinsics = Eigen::Matrix3d::Identity();
  cam.intrinsics(0, 0) = 0.5 * cols / std::tan(0.5 * hfov_deg * deg);
  cam.intrinsics(1, 1) = 0.5 * rows / std::tan(0.5 * vfov_deg * deg);
  cam.intrinsics(0, 2) = 0.5 * cols;
  cam.intrinsics(1, 2) = 0.5 * rows;
  return cam;
}

void CameraModel::validate() const {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("CameraModel: non-positive resolution");
  }
  if (fx() <= 0.0 || fy() <= 0.0) {
    throw std::invalid_argument("CameraModel: non-positive focal length");
  }
  if (cx() <= 0.0 || cx() >= cols || cy() <= 0.0 || cy() >= rows) {
    throw std::invalid_argument("CameraModel: principal point outside image");
  }
  if (intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0 ||
      intrinsics(2, 2) != 1.0) {
    throw std::invalid_argument("CameraModel: last row of K must be (0,0,1)");
  }
  if (!(min_range > 0.0 && min_range < max_range)) {
    throw std::invalid_argument("CameraModel: need 0 < min_range < max_range");
  }
}

Projection project(const CameraModel& camera, const Eigen::Vector3d& point) {
  const Eigen::Vector3d h = camera.intrinsics * point;
  return Projection{h.x() / h.z(), h.y() / h.z(), h.z()};
}

GaussianPoint transform_gaussian(const TransformEdge& edge,
                                 const GaussianPoint& p) {
  GaussianPoint out;
  out.mean = edge.transform.apply(p.mean);
  const Eigen::Matrix3d& r = edge.transform.rotation;
  out.covariance = symmetrize(edge.translation_covariance +
                              r * p.covariance * r.transpose());
  return out;
}

Aabb one_sigma_aabb(const GaussianPoint& p) {
  Aabb box;
  box.center = p.mean;
  box.half_widths = p.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return box;
}

RigidTransform interpolate_pose(const TimedPose& a, const TimedPose& b,
                                double t) {
  if (!(a.time < b.time)) {
    throw std::invalid_argument("interpolate_pose: endpoints not ordered");
  }
  if (t < a.time || t > b.time) {
    throw std::out_of_range("interpolate_pose: t outside [a.time, b.time]");
  }
  if (t == a.time) return a.pose;
  if (t == b.time) return b.pose;
  const double u = (t - a.time) / (b.time - a.time);
  RigidTransform out;
  out.translation = (1.0 - u) * a.pose.translation + u * b.pose.translation;
  const Eigen::Quaterniond qa(a.pose.rotation);
  const Eigen::Quaterniond qb(b.pose.rotation);
  out.rotation = qa.slerp(u, qb).toRotationMatrix();
  return out;
}

RigidTransform interpolate_pose_sequence(const std::vector<TimedPose>& poses,
                                         double t) {
  if (poses.empty()) {
    throw std::out_of_range("interpolate_pose_sequence: empty sequence");
  }
  if (t < poses.front().time || t > poses.back().time) {
    throw std::out_of_range("interpolate_pose_sequence: t outside pose span");
  }
  auto it = std::lower_bound(
      poses.begin(), poses.end(), t,
      [](const TimedPose& p, double time) { return p.time < time; });
  if (it->time == t) return it->pose;
  return interpolate_pose(*(it - 1), *it, t);
}

}  // namespace nanomap
