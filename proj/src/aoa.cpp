#include "uwbslam/aoa.hpp"

#include <cmath>
#include <stdexcept>

#include "uwbslam/feature_window.hpp"

namespace uwbslam {

AnchorRingConfig AnchorRingConfig::defaults() {
  AnchorRingConfig c;
  c.psi = {0.0, M_PI / 2.0, M_PI, -M_PI / 2.0};
  return c;
}

void AnchorRingConfig::validate() const {
  if (num_anchors < 1) throw std::invalid_argument("ring: need at least one anchor");
  if (static_cast<int>(psi.size()) != num_anchors) {
    throw std::invalid_argument("ring: psi must have one entry per anchor");
  }
  if (fov <= 0.0 || fov >= 2.0 * M_PI) throw std::invalid_argument("ring: bad fov");
  if (ring_radius < 0.0) throw std::invalid_argument("ring: negative radius");
  if (det_range_min < 0.0 || det_range_max <= det_range_min) {
    throw std::invalid_argument("ring: bad detection range");
  }
}

Eigen::Vector2d anchor_to_robot_frame(const AoaReading& reading, const AnchorRingConfig& ring) {
  if (reading.anchor_id < 0 || reading.anchor_id >= static_cast<int>(ring.psi.size())) {
    throw std::out_of_range("anchor_to_robot_frame: unknown anchor id");
  }
  Transform2D t = compose(make_transform(ring.psi[reading.anchor_id], ring.ring_radius),
                          make_transform(reading.bearing, reading.range));
  return t.apply(Eigen::Vector2d::Zero());
}

double deadzone_radius(const AnchorRingConfig& ring) {
  const double tan_half = std::tan(ring.fov / 2.0);
  const double half_lambda = ring.lambda() / 2.0;
  const double denom = tan_half * std::cos(half_lambda) - std::sin(half_lambda);
  if (denom <= 0.0) {
    throw std::domain_error("deadzone_radius: geometry leaves the annulus uncovered");
  }
  return ring.ring_radius * tan_half / denom;
}

LosState los_check(const AoaReading& reading, double threshold_db) {
  const double delta = reading.rx_rssi - reading.fp_rssi;
  return delta < threshold_db ? LosState::kLos : LosState::kNlos;
}

bool motion_gate(double v_trans, double v_rot, double min_vel_trans, double min_vel_rot) {
  return v_trans > min_vel_trans || std::abs(v_rot) > min_vel_rot;
}

bool motion_gate(const AoaReading& reading, double min_vel_trans, double min_vel_rot) {
  return motion_gate(reading.v_trans, reading.v_rot, min_vel_trans, min_vel_rot);
}

void TagBuffer::prune(long min_instant) {
  while (!entries_.empty() && entries_.front().instant < min_instant) entries_.pop_front();
}

std::optional<Eigen::Vector2d> filter_tag_observations(
    const std::vector<Eigen::Vector2d>& points, double eps, int min_samples,
    const std::optional<Eigen::Vector2d>& estimate, const Eigen::Matrix2d& estimate_cov,
    double alpha_t, std::vector<int>* accepted_indices, TagFilterReject* reject) {
  if (accepted_indices) accepted_indices->clear();
  if (reject) *reject = TagFilterReject::kNone;
  if (points.empty()) {
    if (reject) *reject = TagFilterReject::kNoCluster;
    return std::nullopt;
  }
  DbscanResult res = dbscan(points, eps, min_samples);
  if (res.num_clusters != 1) {  // zero clusters or ghost clusters
    if (reject) {
      *reject = res.num_clusters == 0 ? TagFilterReject::kNoCluster : TagFilterReject::kMultiCluster;
    }
    return std::nullopt;
  }

  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  std::vector<int> members;
  for (size_t i = 0; i < points.size(); ++i) {
    if (res.labels[i] == 0) {
      centroid += points[i];
      members.push_back(static_cast<int>(i));
    }
  }
  centroid /= static_cast<double>(members.size());

  if (estimate) {
    Eigen::Vector2d innovation = centroid - *estimate;
    double m2 = innovation.dot(estimate_cov.ldlt().solve(innovation));
    if (m2 > alpha_t) {
      if (reject) *reject = TagFilterReject::kGate;
      return std::nullopt;
    }
  }
  if (accepted_indices) *accepted_indices = std::move(members);
  return centroid;
}

TagInitResult initialize_tag(const std::vector<RangeBearing>& samples, const Pose2D& robot_pose,
                             int min_samples, int min_survivors) {
  if (static_cast<int>(samples.size()) < min_samples) {
    throw std::invalid_argument("initialize_tag: too few samples");
  }
  std::vector<double> bearings;
  bearings.reserve(samples.size());
  double range_mean = 0.0;
  for (const auto& s : samples) {
    bearings.push_back(s.bearing);
    range_mean += s.range;
  }
  range_mean /= static_cast<double>(samples.size());
  double range_var = 0.0;
  for (const auto& s : samples) range_var += (s.range - range_mean) * (s.range - range_mean);
  range_var /= static_cast<double>(samples.size());
  const double range_std = std::sqrt(range_var);
  const CircularStats bstats = circular_mean_std(bearings);

  std::vector<RangeBearing> kept;
  for (const auto& s : samples) {
    if (std::abs(s.range - range_mean) > range_std) continue;
    if (std::abs(angle_diff(s.bearing, bstats.mean_theta)) > bstats.std_theta) continue;
    kept.push_back(s);
  }
  if (static_cast<int>(kept.size()) < min_survivors) {
    throw std::runtime_error("initialize_tag: too few survivors after mu +/- sigma filtering");
  }

  TagInitResult out;
  double r = 0.0;
  std::vector<double> kb;
  for (const auto& s : kept) {
    r += s.range;
    kb.push_back(s.bearing);
  }
  out.mean_range = r / static_cast<double>(kept.size());
  const CircularStats kstats = circular_mean_std(kb);
  out.mean_bearing = kstats.mean_theta;
  double rv = 0.0;
  for (const auto& s : kept) rv += (s.range - out.mean_range) * (s.range - out.mean_range);
  out.std_range = std::sqrt(rv / static_cast<double>(kept.size()));
  out.std_bearing = kstats.std_theta;
  out.survivors = static_cast<int>(kept.size());
  Eigen::Vector2d local(out.mean_range * std::cos(out.mean_bearing),
                        out.mean_range * std::sin(out.mean_bearing));
  out.position = transform_to_world(robot_pose, local);
  return out;
}

bool DeploymentMonitor::update(double displacement, bool feature_seen) {
  if (displacement < 0.0) throw std::invalid_argument("deployment monitor: negative displacement");
  if (feature_seen) {
    distance_ = 0.0;
    return false;
  }
  distance_ += displacement;
  if (distance_ > dep_dist_) {
    distance_ = 0.0;
    return true;
  }
  return false;
}

}  // namespace uwbslam
