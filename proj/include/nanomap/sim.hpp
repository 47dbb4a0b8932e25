#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nanomap/chain.hpp"
#include "nanomap/geometry.hpp"
#include "nanomap/point_cloud.hpp"
#include "nanomap/world.hpp"

namespace nanomap::sim {

/// Acceleration-noise model: x/y accelerations are corrupted per step as
/// a~ = (a + eta) * xi with eta ~ N(0, sigma^2) and xi ~ N(1, sigma^2),
/// then double-integrated. z and rotations stay noise-free.
struct DriftConfig {
  double sigma_actual = 0.0;  // standard deviation of eta and xi
  double rate_hz = 100.0;
  std::uint64_t seed = 0;
};

struct Waypoint {
  double time = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  /// Tangent handle; Catmull-Rom estimate when unset.
  std::optional<Eigen::Vector3d> velocity;
  double yaw = 0.0;
};

struct TrajectoryConfig {
  std::vector<Waypoint> waypoints;  // >= 2, strictly increasing times
  double pose_rate_hz = 100.0;
};

/// Cubic-Hermite samples of the waypoint path at the pose rate.
std::vector<TimedPose> sample_trajectory(const TrajectoryConfig& config);

struct CorrectionSchedule {
  enum class Mode { none, periodic, single };
  Mode mode = Mode::none;
  double period_s = 1.0;  // periodic: corrections at t0 + k * period
  double window_s = 3.0;  // each batch covers [t - window, t]
  double at_s = 0.0;      // single: one batch at this time
};

/// Body-frame query sample evaluated at every scenario step.
struct SamplePoint {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d sigma = Eigen::Vector3d::Zero();  // per-axis std devs
};

struct ScenarioConfig {
  std::string name;
  World world;
  CameraModel camera;
  double camera_rate_hz = 30.0;
  /// Sensor-to-body extrinsic.
  RigidTransform mount;
  TrajectoryConfig trajectory;
  DriftConfig drift;
  std::size_t history_length = 150;
  /// Per-edge covariance; unset derives f(sigma_actual) from the drift model.
  std::optional<Eigen::Matrix3d> edge_sigma;
  CorrectionSchedule corrections;
  std::vector<SamplePoint> samples;
  std::size_t k = 1;
  double bucket_s = 1.0;
  /// Phase windows used by the histogram analyses.
  double cruise_begin = 0.0, cruise_end = 0.0;
  double decel_begin = 0.0, decel_end = 0.0;
};

struct QueryRecord {
  double time = 0.0;
  std::size_t query_id = 0;
  std::size_t search_depth = 0;
  std::optional<std::size_t> frame_index;
  /// Distance between the returned nearest neighbor (mapped to the world via
  /// the true pose) and the true nearest obstacle point; NaN if no neighbor.
  double error_m = 0.0;
  /// True distance from the vehicle to the nearest obstacle at this time.
  double gamma_m = 0.0;
  /// World -> body -> selected frame -> world bookkeeping residual.
  double roundtrip_m = 0.0;
};

struct ScenarioMetrics {
  std::vector<QueryRecord> records;
  /// bucket index -> search depth -> count; buckets are bucket_s wide.
  std::map<int, std::map<std::size_t, std::size_t>> depth_histogram;
  double gamma = 0.0;  // min distance to any obstacle over the run
  std::size_t total_queries = 0;
  double bucket_s = 1.0;

  double depth1_fraction() const;
  double cumulative_depth_fraction(std::size_t max_depth) const;
  /// Fraction of queries in [t0, t1) with search depth > deeper_than.
  double deep_fraction(double t0, double t1, std::size_t deeper_than) const;
  double mean_error() const;
  double max_roundtrip() const;
};

/// Captured input streams of a scenario run, for log export and replay.
struct ScenarioStreams {
  CameraModel camera;
  std::vector<TimedPose> truth_poses;
  std::vector<TimedPose> emitted_poses;  // what the chain ingested
  std::vector<std::pair<double, std::shared_ptr<const PointCloud>>> clouds;
  std::vector<std::pair<double, std::vector<TimedPose>>> correction_batches;
  std::vector<std::pair<double, GaussianPoint>> queries;
};

/// Per-pixel ray cast through the camera; the nearest surface hit within
/// [min_range, max_range] becomes the point, otherwise the pixel is invalid.
PointCloud render_depth(const World& world, const RigidTransform& camera_pose,
                        const CameraModel& camera);

/// Recovers per-step accelerations from the truth by central differencing,
/// corrupts them with the drift model, and double-integrates from the true
/// initial state. Deterministic per seed; exact copy when sigma_actual == 0.
/// Requires at least 3 poses.
std::vector<TimedPose> corrupt_trajectory(const std::vector<TimedPose>& truth,
                                          const DriftConfig& config);

/// Monte Carlo estimate of the drift covariance over `window_s`, divided by
/// `history_len`; zero in z. This is the f(sigma_actual) mapping from the
/// noise level to the per-edge covariance.
Eigen::Matrix3d derive_edge_sigma(const DriftConfig& config,
                                  std::size_t history_len, double window_s,
                                  std::size_t mc_runs = 1000);

/// Replays corrupted poses, true-pose-rendered clouds, and scheduled
/// corrections into a chain, evaluating the sample plan after every frame.
ScenarioMetrics run_scenario(const ScenarioConfig& config,
                             ScenarioStreams* capture = nullptr);

/// Canonical desk-scale scenarios.
ScenarioConfig forward_corridor_scenario(double sigma_actual = 0.0,
                                         std::uint64_t seed = 1);
ScenarioConfig hard_stop_scenario();
ScenarioConfig correction_study_scenario(double sigma_actual,
                                         std::uint64_t seed, bool corrected);

}  // namespace nanomap::sim
