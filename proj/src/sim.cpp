#include "nanomap/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "nanomap/query.hpp"

namespace nanomap::sim {

namespace {

Eigen::Matrix3d yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace

std::vector<TimedPose> sample_trajectory(const TrajectoryConfig& config) {
  const auto& wps = config.waypoints;
  if (wps.size() < 2) {
    throw std::invalid_argument("sample_trajectory: need at least 2 waypoints");
  }
  for (std::size_t i = 1; i < wps.size(); ++i) {
    if (wps[i].time <= wps[i - 1].time) {
      throw std::invalid_argument("sample_trajectory: waypoint times not increasing");
    }
  }
  if (config.pose_rate_hz <= 0.0) {
    throw std::invalid_argument("sample_trajectory: pose rate must be > 0");
  }

  // Tangents: explicit velocity if given, else Catmull-Rom / one-sided.
  std::vector<Eigen::Vector3d> tangents(wps.size());
  for (std::size_t i = 0; i < wps.size(); ++i) {
    if (wps[i].velocity) {
      tangents[i] = *wps[i].velocity;
    } else if (i == 0) {
      tangents[i] = (wps[1].position - wps[0].position) / (wps[1].time - wps[0].time);
    } else if (i + 1 == wps.size()) {
      tangents[i] = (wps[i].position - wps[i - 1].position) /
                    (wps[i].time - wps[i - 1].time);
    } else {
      tangents[i] = (wps[i + 1].position - wps[i - 1].position) /
                    (wps[i + 1].time - wps[i - 1].time);
    }
  }

  const double t0 = wps.front().time;
  const double t_end = wps.back().time;
  const double dt = 1.0 / config.pose_rate_hz;
  const std::size_t n = static_cast<std::size_t>(std::floor((t_end - t0) / dt + 1e-9)) + 1;

  std::vector<TimedPose> out;
  out.reserve(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    while (seg + 2 < wps.size() && t > wps[seg + 1].time) ++seg;
    const Waypoint& a = wps[seg];
    const Waypoint& b = wps[seg + 1];
    const double h = b.time - a.time;
    const double s = std::clamp((t - a.time) / h, 0.0, 1.0);
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    TimedPose pose;
    pose.time = t;
    pose.pose.translation = h00 * a.position + h10 * h * tangents[seg] +
                            h01 * b.position + h11 * h * tangents[seg + 1];
    const double yaw = a.yaw + s * (b.yaw - a.yaw);
    pose.pose.rotation = yaw_rotation(yaw);
    out.push_back(pose);
  }
  return out;
}

PointCloud render_depth(const World& world, const RigidTransform& camera_pose,
                        const CameraModel& camera) {
  camera.validate();
  world.validate();
  PointCloud cloud(camera.rows, camera.cols);
  const Eigen::Matrix3d k_inv = camera.intrinsics.inverse();
  const Eigen::Vector3d origin = camera_pose.translation;
  for (int r = 0; r < camera.rows; ++r) {
    for (int c = 0; c < camera.cols; ++c) {
      // Ray through the pixel center; dir.z() == 1, so the ray parameter of
      // a hit is exactly the sensor depth.
      const Eigen::Vector3d dir_sensor =
          k_inv * Eigen::Vector3d(c + 0.5, r + 0.5, 1.0);
      const Eigen::Vector3d dir_world = camera_pose.rotation * dir_sensor;
      const auto t = world.raycast(origin, dir_world);
      if (t && *t >= camera.min_range && *t <= camera.max_range) {
        cloud.set_point(r, c, *t * dir_sensor);
      }
    }
  }
  return cloud;
}

std::vector<TimedPose> corrupt_trajectory(const std::vector<TimedPose>& truth,
                                          const DriftConfig& config) {
  if (truth.size() < 3) {
    throw std::invalid_argument(
        "corrupt_trajectory: need at least 3 poses to difference");
  }
  if (config.sigma_actual < 0.0 || config.rate_hz <= 0.0) {
    throw std::invalid_argument("corrupt_trajectory: bad drift config");
  }
  if (config.sigma_actual == 0.0) return truth;

  const std::size_t n = truth.size();
  // Step velocities and the central second differences they imply; the
  // integrator below inverts these exactly, so the noise-free path is the
  // identity map.
  std::vector<Eigen::Vector2d> vel(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = truth[i + 1].time - truth[i].time;
    vel[i] = (truth[i + 1].pose.translation.head<2>() -
              truth[i].pose.translation.head<2>()) /
             h;
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double sigma = config.sigma_actual;

  std::vector<TimedPose> out = truth;
  Eigen::Vector2d p = truth[0].pose.translation.head<2>();
  Eigen::Vector2d v = vel[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = truth[i + 1].time - truth[i].time;
    p += v * h;
    out[i + 1].pose.translation.head<2>() = p;
    if (i + 2 < n) {
      const double h_acc = truth[i + 2].time - truth[i + 1].time;
      const Eigen::Vector2d accel = (vel[i + 1] - vel[i]) / h_acc;
      // Draw order fixed per step: eta_x, xi_x, eta_y, xi_y.
      for (int axis = 0; axis < 2; ++axis) {
        const double eta = sigma * unit(rng);
        const double xi = 1.0 + sigma * unit(rng);
        const double corrupted = (accel[axis] + eta) * xi;
        v[axis] += corrupted * h_acc;
      }
    }
  }
  return out;
}

Eigen::Matrix3d derive_edge_sigma(const DriftConfig& config,
                                  std::size_t history_len, double window_s,
                                  std::size_t mc_runs) {
  if (history_len < 1) {
    throw std::invalid_argument("derive_edge_sigma: history_len must be >= 1");
  }
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  if (config.sigma_actual == 0.0) return out;

  const double dt = 1.0 / config.rate_hz;
  const std::size_t steps =
      std::max<std::size_t>(static_cast<std::size_t>(std::llround(window_s / dt)), 2);
  std::vector<TimedPose> rest(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    rest[i].time = static_cast<double>(i) * dt;
  }

  Eigen::Matrix2d accum = Eigen::Matrix2d::Zero();
  for (std::size_t run = 0; run < mc_runs; ++run) {
    DriftConfig per_run = config;
    per_run.seed = config.seed + run;
    const std::vector<TimedPose> drifted = corrupt_trajectory(rest, per_run);
    const Eigen::Vector2d d = drifted.back().pose.translation.head<2>();
    accum += d * d.transpose();
  }
  accum /= static_cast<double>(mc_runs);
  out.topLeftCorner<2, 2>() = accum / static_cast<double>(history_len);
  return out;
}

double ScenarioMetrics::depth1_fraction() const {
  if (total_queries == 0) return 0.0;
  std::size_t count = 0;
  for (const QueryRecord& r : records) {
    if (r.search_depth == 1) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(total_queries);
}

double ScenarioMetrics::cumulative_depth_fraction(std::size_t max_depth) const {
  if (total_queries == 0) return 0.0;
  std::size_t count = 0;
  for (const QueryRecord& r : records) {
    if (r.search_depth <= max_depth) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(total_queries);
}

double ScenarioMetrics::deep_fraction(double t0, double t1,
                                      std::size_t deeper_than) const {
  std::size_t total = 0, deep = 0;
  for (const QueryRecord& r : records) {
    if (r.time < t0 || r.time >= t1) continue;
    ++total;
    if (r.search_depth > deeper_than) ++deep;
  }
  return total == 0 ? 0.0 : static_cast<double>(deep) / static_cast<double>(total);
}

double ScenarioMetrics::mean_error() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const QueryRecord& r : records) {
    if (std::isfinite(r.error_m)) {
      sum += r.error_m;
      ++count;
    }
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : sum / static_cast<double>(count);
}

double ScenarioMetrics::max_roundtrip() const {
  double worst = 0.0;
  for (const QueryRecord& r : records) worst = std::max(worst, r.roundtrip_m);
  return worst;
}

namespace {

struct CorrectionPlan {
  std::vector<double> times;
  double window_s = 0.0;
};

CorrectionPlan plan_corrections(const CorrectionSchedule& schedule, double t0,
                                double t_end) {
  CorrectionPlan plan;
  plan.window_s = schedule.window_s;
  switch (schedule.mode) {
    case CorrectionSchedule::Mode::none:
      break;
    case CorrectionSchedule::Mode::periodic:
      for (double t = t0 + schedule.period_s; t <= t_end + 1e-9;
           t += schedule.period_s) {
        plan.times.push_back(t);
      }
      break;
    case CorrectionSchedule::Mode::single:
      plan.times.push_back(schedule.at_s);
      break;
  }
  return plan;
}

}  // namespace

ScenarioMetrics run_scenario(const ScenarioConfig& config,
                             ScenarioStreams* capture) {
  config.world.validate();
  config.camera.validate();
  if (config.camera_rate_hz <= 0.0) {
    throw std::invalid_argument("run_scenario: camera rate must be > 0");
  }

  const std::vector<TimedPose> truth = sample_trajectory(config.trajectory);
  const std::vector<TimedPose> corrupted =
      corrupt_trajectory(truth, config.drift);
  const double t0 = truth.front().time;
  const double t_end = truth.back().time;

  Eigen::Matrix3d edge_sigma = Eigen::Matrix3d::Zero();
  if (config.edge_sigma) {
    edge_sigma = *config.edge_sigma;
  } else if (config.drift.sigma_actual > 0.0) {
    edge_sigma = derive_edge_sigma(config.drift, config.history_length, 5.0);
  }

  ChainConfig chain_config;
  chain_config.capacity = config.history_length;
  chain_config.edge_sigma = edge_sigma;
  chain_config.nominal_frame_period = 1.0 / config.camera_rate_hz;
  chain_config.mount = config.mount;
  FrameChain chain(chain_config);

  const CorrectionPlan corrections =
      plan_corrections(config.corrections, t0, t_end);

  ScenarioMetrics metrics;
  metrics.bucket_s = config.bucket_s;
  metrics.gamma = std::numeric_limits<double>::infinity();

  if (capture) {
    capture->camera = config.camera;
    capture->truth_poses = truth;
  }

  // Position/velocity rebase offsets applied to the emitted corrupted
  // stream after each correction, emulating a sliding-window estimator that
  // resumes from its corrected state.
  Eigen::Vector2d offset_p = Eigen::Vector2d::Zero();
  Eigen::Vector2d offset_v = Eigen::Vector2d::Zero();
  double offset_t = t0;

  const double frame_dt = 1.0 / config.camera_rate_hz;
  std::size_t pose_i = 0;
  std::size_t frame_i = 0;
  std::size_t corr_i = 0;
  double last_queried_frame = -std::numeric_limits<double>::infinity();

  const auto emit_pose = [&](std::size_t i) {
    TimedPose emitted = corrupted[i];
    const double dt = emitted.time - offset_t;
    emitted.pose.translation.head<2>() -= offset_p + offset_v * dt;
    chain.add_pose(emitted);
    if (capture) capture->emitted_poses.push_back(emitted);
  };

  const auto run_queries = [&](double t_query) {
    const RigidTransform true_body =
        interpolate_pose_sequence(truth, t_query);
    const double clearance =
        std::max(config.world.signed_distance(true_body.translation), 0.0);
    metrics.gamma = std::min(metrics.gamma, clearance);
    const int bucket =
        static_cast<int>(std::floor((t_query - t0) / config.bucket_s));
    for (std::size_t s = 0; s < config.samples.size(); ++s) {
      const SamplePoint& sample = config.samples[s];
      const GaussianPoint body_query(
          sample.mean, sample.sigma.cwiseProduct(sample.sigma).asDiagonal());
      if (capture) capture->queries.emplace_back(t_query, body_query);
      const QueryResult result = nanomap_query(chain, body_query, config.k);

      QueryRecord record;
      record.time = t_query;
      record.query_id = metrics.total_queries;
      record.search_depth = result.search_depth;
      record.frame_index = result.frame_index;
      record.gamma_m = clearance;

      const Eigen::Vector3d world_sample = true_body.apply(sample.mean);
      const auto body_neighbors = neighbors_in_body_frame(chain, result);
      if (!body_neighbors.empty() && !config.world.empty()) {
        const Eigen::Vector3d neighbor_world =
            true_body.apply(body_neighbors.front());
        const Eigen::Vector3d gt =
            config.world.closest_surface_point(world_sample);
        record.error_m = (neighbor_world - gt).norm();
      } else {
        record.error_m = std::numeric_limits<double>::quiet_NaN();
      }

      const std::size_t frame_index = result.frame_index.value_or(0);
      const Eigen::Vector3d world_back =
          chain.frame_world_pose(frame_index).apply(result.query_in_frame.mean);
      record.roundtrip_m = (world_back - world_sample).norm();

      metrics.depth_histogram[bucket][result.search_depth] += 1;
      metrics.records.push_back(record);
      ++metrics.total_queries;
    }
  };

  while (pose_i < truth.size() || frame_i * frame_dt + t0 <= t_end + 1e-9) {
    const double pose_t = pose_i < truth.size()
                              ? truth[pose_i].time
                              : std::numeric_limits<double>::infinity();
    const double frame_t = t0 + static_cast<double>(frame_i) * frame_dt;
    const double next_frame_t =
        frame_t <= t_end + 1e-9 ? frame_t
                                : std::numeric_limits<double>::infinity();
    const double corr_t = corr_i < corrections.times.size()
                              ? corrections.times[corr_i]
                              : std::numeric_limits<double>::infinity();
    if (!std::isfinite(pose_t) && !std::isfinite(next_frame_t)) break;

    if (pose_t <= next_frame_t && pose_t <= corr_t) {
      emit_pose(pose_i);
      ++pose_i;
    } else if (next_frame_t <= corr_t) {
      const RigidTransform true_sensor = compose(
          interpolate_pose_sequence(truth, next_frame_t), config.mount);
      auto cloud = std::make_shared<PointCloud>(
          render_depth(config.world, true_sensor, config.camera));
      if (capture) capture->clouds.emplace_back(next_frame_t, cloud);
      chain.add_cloud(std::move(cloud), next_frame_t, config.camera);
      ++frame_i;
    } else {
      // Correction batch: the true poses over the trailing window.
      std::vector<TimedPose> batch;
      for (const TimedPose& p : truth) {
        if (p.time >= corr_t - corrections.window_s && p.time <= corr_t) {
          batch.push_back(p);
        }
      }
      if (batch.size() >= 2) {
        chain.apply_pose_updates(batch);
        if (capture) capture->correction_batches.emplace_back(corr_t, batch);
        // Rebase the live stream onto the corrected state.
        std::size_t anchor = pose_i == 0 ? 0 : pose_i - 1;
        const Eigen::Vector2d drift_p =
            corrupted[anchor].pose.translation.head<2>() -
            truth[anchor].pose.translation.head<2>();
        Eigen::Vector2d drift_v = Eigen::Vector2d::Zero();
        if (anchor > 0) {
          const double h = truth[anchor].time - truth[anchor - 1].time;
          const Eigen::Vector2d prev =
              corrupted[anchor - 1].pose.translation.head<2>() -
              truth[anchor - 1].pose.translation.head<2>();
          drift_v = (drift_p - prev) / h;
        }
        offset_p = drift_p;
        offset_v = drift_v;
        offset_t = truth[anchor].time;
      }
      ++corr_i;
    }

    // Evaluate the sample plan once per newly linked frame; the body frame
    // is anchored at the newest emitted pose.
    if (!chain.empty() && pose_i > 0 &&
        chain.newest_frame_time() > last_queried_frame) {
      last_queried_frame = chain.newest_frame_time();
      run_queries(truth[pose_i - 1].time);
    }
  }

  if (!std::isfinite(metrics.gamma)) metrics.gamma = 0.0;
  return metrics;
}

}  // namespace nanomap::sim
