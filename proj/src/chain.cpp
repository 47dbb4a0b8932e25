#include "nanomap/chain.hpp"

#include <algorithm>
#include <stdexcept>

namespace nanomap {

namespace {

RigidTransform interpolate_deque(const std::deque<TimedPose>& poses, double t) {
  if (poses.empty() || t < poses.front().time || t > poses.back().time) {
    throw std::out_of_range("FrameChain: pose time not bracketed");
  }
  auto it = std::lower_bound(
      poses.begin(), poses.end(), t,
      [](const TimedPose& p, double time) { return p.time < time; });
  if (it->time == t) return it->pose;
  return interpolate_pose(*(it - 1), *it, t);
}

}  // namespace

FrameChain::FrameChain(ChainConfig config) : config_(std::move(config)) {
  if (config_.capacity < 1) {
    throw std::invalid_argument("FrameChain: capacity must be >= 1");
  }
  if (config_.nominal_frame_period <= 0.0) {
    throw std::invalid_argument("FrameChain: nominal_frame_period must be > 0");
  }
  config_.mount.validate();
}

void FrameChain::add_pose(const TimedPose& pose) {
  if (!pose_buffer_.empty() && pose.time < pose_buffer_.back().time) {
    throw std::invalid_argument("FrameChain::add_pose: out-of-order pose");
  }
  if (!pose_buffer_.empty() && pose.time == pose_buffer_.back().time) {
    pose_buffer_.back() = pose;
  } else {
    pose_buffer_.push_back(pose);
  }
  drain_pending();
  refresh_body_edge();
  prune_pose_buffer();
}

void FrameChain::add_cloud(std::shared_ptr<const PointCloud> cloud,
                           double timestamp, const CameraModel& camera,
                           std::optional<Eigen::Matrix3d> edge_covariance) {
  if (!cloud) throw std::invalid_argument("FrameChain::add_cloud: null cloud");
  cloud->validate();
  camera.validate();
  if (!pairs_.empty() && timestamp <= pairs_.front().frame.timestamp) {
    throw std::invalid_argument(
        "FrameChain::add_cloud: timestamp not newer than newest frame");
  }
  if (!pose_buffer_.empty() && timestamp < pose_buffer_.front().time) {
    throw std::invalid_argument(
        "FrameChain::add_cloud: timestamp precedes buffered poses");
  }

  // Tree construction does not need the pose; build it up front so parked
  // frames are ready the moment their bracketing pose arrives.
  SensorFrame frame;
  frame.timestamp = timestamp;
  frame.tree = KdTree::build(cloud, config_.kdtree_leaf_size);
  frame.cloud = std::move(cloud);
  frame.camera = camera;

  if (pose_buffer_.empty() || timestamp > pose_buffer_.back().time) {
    if (pending_.size() >= config_.pending_limit) {
      pending_.pop_front();
      ++dropped_pending_;
    }
    pending_.push_back(Pending{std::move(frame), edge_covariance});
    return;
  }
  insert_frame(std::move(frame), edge_covariance);
  refresh_body_edge();
  prune_pose_buffer();
}

void FrameChain::insert_frame(
    SensorFrame frame, const std::optional<Eigen::Matrix3d>& edge_covariance) {
  const RigidTransform body = body_pose_at(frame.timestamp);
  const RigidTransform world_pose = compose(body, config_.mount);

  Pair pair;
  pair.frame = std::move(frame);
  pair.world_pose = world_pose;
  if (!pairs_.empty()) {
    // T from the new frame into the previous head's frame.
    const Pair& old_head = pairs_.front();
    TransformEdge edge;
    edge.transform = compose(old_head.world_pose.inverse(), world_pose);
    edge.translation_covariance =
        edge_covariance.value_or(config_.edge_sigma);
    pair.edge_to_older = edge;
  }
  pairs_.push_front(std::move(pair));
  while (pairs_.size() > config_.capacity) {
    pairs_.pop_back();
  }
  if (!pairs_.empty()) pairs_.back().edge_to_older.reset();
}

void FrameChain::drain_pending() {
  while (!pending_.empty() &&
         pending_.front().frame.timestamp <= pose_buffer_.back().time) {
    Pending next = std::move(pending_.front());
    pending_.pop_front();
    const double t = next.frame.timestamp;
    const bool stale = !pairs_.empty() && t <= pairs_.front().frame.timestamp;
    const bool bracketable = t >= pose_buffer_.front().time;
    if (stale || !bracketable) {
      ++dropped_pending_;
      continue;
    }
    insert_frame(std::move(next.frame), next.edge_covariance);
  }
}

void FrameChain::refresh_body_edge() {
  if (pairs_.empty() || pose_buffer_.empty()) {
    body_edge_valid_ = false;
    return;
  }
  const Pair& head = pairs_.front();
  const TimedPose& newest = pose_buffer_.back();
  body_edge_.transform = compose(head.world_pose.inverse(), newest.pose);
  const double dt = newest.time - head.frame.timestamp;
  body_edge_.translation_covariance =
      config_.edge_sigma * (dt / config_.nominal_frame_period);
  body_edge_valid_ = true;
}

void FrameChain::prune_pose_buffer() {
  double cutoff;
  if (!pairs_.empty()) {
    cutoff = pairs_.back().frame.timestamp - config_.pose_retention_margin;
  } else if (!pose_buffer_.empty()) {
    // No frames yet: keep enough history to bracket a full chain.
    cutoff = pose_buffer_.back().time -
             (config_.capacity * config_.nominal_frame_period +
              config_.pose_retention_margin);
  } else {
    return;
  }
  while (pose_buffer_.size() > 1 && pose_buffer_.front().time < cutoff) {
    pose_buffer_.pop_front();
  }
}

std::size_t FrameChain::apply_pose_updates(
    std::span<const TimedPose> corrections) {
  if (corrections.empty()) return 0;
  for (std::size_t i = 1; i < corrections.size(); ++i) {
    if (corrections[i].time <= corrections[i - 1].time) {
      throw std::invalid_argument(
          "FrameChain::apply_pose_updates: corrections not time-ordered");
    }
  }
  const double span_begin = corrections.front().time;
  const double span_end = corrections.back().time;
  const std::vector<TimedPose> corrected(corrections.begin(),
                                         corrections.end());

  const auto covered = [&](double t) {
    return t >= span_begin && t <= span_end;
  };

  // Refresh world poses of covered frames.
  for (Pair& pair : pairs_) {
    if (covered(pair.frame.timestamp)) {
      pair.world_pose = compose(
          interpolate_pose_sequence(corrected, pair.frame.timestamp),
          config_.mount);
    }
  }

  // Recompute edges whose both endpoints are covered.
  std::size_t rewritten = 0;
  for (auto it = pairs_.begin(); it != pairs_.end(); ++it) {
    auto older = std::next(it);
    if (older == pairs_.end()) break;
    if (!covered(it->frame.timestamp) || !covered(older->frame.timestamp)) {
      continue;
    }
    it->edge_to_older->transform =
        compose(older->world_pose.inverse(), it->world_pose);
    ++rewritten;
  }

  // Splice the corrections into the pose buffer.
  std::deque<TimedPose> merged;
  for (const TimedPose& p : pose_buffer_) {
    if (p.time < span_begin) merged.push_back(p);
  }
  for (const TimedPose& p : corrected) merged.push_back(p);
  for (const TimedPose& p : pose_buffer_) {
    if (p.time > span_end) merged.push_back(p);
  }
  pose_buffer_ = std::move(merged);

  refresh_body_edge();
  return rewritten;
}

void FrameChain::trim(std::size_t new_capacity) {
  if (new_capacity < 1) {
    throw std::invalid_argument("FrameChain::trim: capacity must be >= 1");
  }
  config_.capacity = new_capacity;
  while (pairs_.size() > new_capacity) {
    pairs_.pop_back();
  }
  if (!pairs_.empty()) pairs_.back().edge_to_older.reset();
}

const TransformEdge& FrameChain::body_edge() const {
  if (!body_edge_valid_) {
    throw std::logic_error("FrameChain::body_edge: no frame or pose yet");
  }
  return body_edge_;
}

double FrameChain::newest_frame_time() const {
  if (pairs_.empty()) {
    throw std::logic_error("FrameChain::newest_frame_time: empty chain");
  }
  return pairs_.front().frame.timestamp;
}

const RigidTransform& FrameChain::frame_world_pose(std::size_t i) const {
  if (i >= pairs_.size()) {
    throw std::out_of_range("FrameChain::frame_world_pose: bad index");
  }
  auto it = pairs_.begin();
  std::advance(it, static_cast<long>(i));
  return it->world_pose;
}

RigidTransform FrameChain::body_pose_at(double t) const {
  return interpolate_deque(pose_buffer_, t);
}

}  // namespace nanomap
