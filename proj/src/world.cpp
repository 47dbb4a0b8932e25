#include "nanomap/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nanomap {

namespace {

std::optional<double> ray_box(const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& dir,
                              const World::Box& box) {
  // Slab method; relies on IEEE inf semantics for axis-parallel rays.
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double inv = 1.0 / dir[a];
    double t0 = (box.min[a] - origin[a]) * inv;
    double t1 = (box.max[a] - origin[a]) * inv;
    if (inv < 0.0) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_far <= 0.0) return std::nullopt;
  return t_near > 0.0 ? t_near : t_far;
}

std::optional<double> ray_sphere(const Eigen::Vector3d& origin,
                                 const Eigen::Vector3d& dir,
                                 const World::Sphere& sphere) {
  const Eigen::Vector3d oc = origin - sphere.center;
  const double a = dir.squaredNorm();
  const double half_b = oc.dot(dir);
  const double c = oc.squaredNorm() - sphere.radius * sphere.radius;
  const double disc = half_b * half_b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = (-half_b - sq) / a;
  if (t0 > 0.0) return t0;
  const double t1 = (-half_b + sq) / a;
  if (t1 > 0.0) return t1;
  return std::nullopt;
}

double box_signed_distance(const Eigen::Vector3d& p, const World::Box& box) {
  const Eigen::Vector3d center = 0.5 * (box.min + box.max);
  const Eigen::Vector3d half = 0.5 * (box.max - box.min);
  const Eigen::Vector3d q = (p - center).cwiseAbs() - half;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

Eigen::Vector3d box_closest_point(const Eigen::Vector3d& p,
                                  const World::Box& box) {
  const Eigen::Vector3d clamped = p.cwiseMax(box.min).cwiseMin(box.max);
  if ((clamped - p).squaredNorm() > 0.0) return clamped;
  // Inside: project to the nearest face.
  Eigen::Vector3d out = p;
  double best = std::numeric_limits<double>::infinity();
  int axis = 0;
  double value = box.min[0];
  for (int a = 0; a < 3; ++a) {
    if (p[a] - box.min[a] < best) {
      best = p[a] - box.min[a];
      axis = a;
      value = box.min[a];
    }
    if (box.max[a] - p[a] < best) {
      best = box.max[a] - p[a];
      axis = a;
      value = box.max[a];
    }
  }
  out[axis] = value;
  return out;
}

}  // namespace

void World::validate() const {
  for (const Box& b : boxes) {
    if (!((b.max - b.min).minCoeff() > 0.0)) {
      throw std::invalid_argument("World: box with non-positive extent");
    }
  }
  for (const Sphere& s : spheres) {
    if (!(s.radius > 0.0)) {
      throw std::invalid_argument("World: sphere with non-positive radius");
    }
  }
}

std::optional<double> World::raycast(const Eigen::Vector3d& origin,
                                     const Eigen::Vector3d& dir) const {
  std::optional<double> best;
  for (const Box& b : boxes) {
    if (const auto t = ray_box(origin, dir, b)) {
      if (!best || *t < *best) best = t;
    }
  }
  for (const Sphere& s : spheres) {
    if (const auto t = ray_sphere(origin, dir, s)) {
      if (!best || *t < *best) best = t;
    }
  }
  return best;
}

double World::signed_distance(const Eigen::Vector3d& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Box& b : boxes) best = std::min(best, box_signed_distance(p, b));
  for (const Sphere& s : spheres) {
    best = std::min(best, (p - s.center).norm() - s.radius);
  }
  return best;
}

Eigen::Vector3d World::closest_surface_point(const Eigen::Vector3d& p) const {
  if (empty()) {
    throw std::logic_error("World::closest_surface_point: empty world");
  }
  Eigen::Vector3d best_point = Eigen::Vector3d::Zero();
  double best = std::numeric_limits<double>::infinity();
  const auto consider = [&](const Eigen::Vector3d& candidate) {
    const double d = (candidate - p).norm();
    if (d < best) {
      best = d;
      best_point = candidate;
    }
  };
  for (const Box& b : boxes) consider(box_closest_point(p, b));
  for (const Sphere& s : spheres) {
    const Eigen::Vector3d dir = p - s.center;
    const double len = dir.norm();
    if (len > 0.0) {
      consider(s.center + dir * (s.radius / len));
    } else {
      consider(s.center + Eigen::Vector3d(s.radius, 0.0, 0.0));
    }
  }
  return best_point;
}

}  // namespace nanomap
