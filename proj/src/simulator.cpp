#include "uwbslam/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwbslam {

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                        const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
  const Eigen::Vector2d r = p2 - p1;
  const Eigen::Vector2d s = q2 - q1;
  const double denom = cross2(r, s);
  if (std::abs(denom) < 1e-12) return false;  // parallel; grazing contact ignored
  const double t = cross2(q1 - p1, s) / denom;
  const double u = cross2(q1 - p1, r) / denom;
  return t > 1e-9 && t < 1.0 - 1e-9 && u > 1e-9 && u < 1.0 - 1e-9;
}

Eigen::Vector2d closest_point_on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                         const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

double quantize(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

void WorldModel::deploy_tag(const Eigen::Vector2d& position, int tag_id) {
  for (const auto& tag : tags) {
    if (tag.id == tag_id) throw std::invalid_argument("deploy_tag: duplicate tag id");
  }
  tags.push_back(Tag{tag_id, position});
}

bool WorldModel::occluded(const Eigen::Vector2d& p, const Eigen::Vector2d& q) const {
  for (const auto& w : walls) {
    if (segments_intersect(p, q, w.a, w.b)) return true;
  }
  return false;
}

Simulator::Simulator(WorldModel world, TrajectoryScript script, NoiseConfig noise, double dt,
                     uint64_t seed)
    : world_(std::move(world)), script_(std::move(script)), noise_(noise), dt_(dt), rng_(seed) {
  if (dt <= 0.0) throw std::invalid_argument("Simulator: dt must be positive");
  if (!script_.waypoints.empty()) {
    true_pose_ = Pose2D(0.0, 0.0, 0.0);
    const auto& wp = script_.waypoints.front();
    const Eigen::Vector2d d = wp.target - Eigen::Vector2d(0.0, 0.0);
    if (d.norm() > 1e-9) true_pose_.theta = std::atan2(d.y(), d.x());
  }
  odom_pose_ = true_pose_;
}

double Simulator::gauss(double sigma) {
  if (sigma <= 0.0) return 0.0;
  return sigma * normal_(rng_);
}

void Simulator::request_halt(double duration) { halt_until_ = std::max(halt_until_, t_ + duration); }

SimStep Simulator::step() {
  SimStep out;
  if (finished_ || script_.waypoints.empty()) {
    finished_ = true;
    out.finished = true;
    out.t = t_;
    out.truth = true_pose_;
    out.odom = odom_pose_;
    return out;
  }

  const Pose2D prev_true = true_pose_;
  const bool halt_now = t_ < halt_until_ || t_ < wp_halt_until_;
  if (!halt_now) {
    const Waypoint& wp = script_.waypoints[wp_index_];
    Eigen::Vector2d pos(true_pose_.x, true_pose_.y);
    Eigen::Vector2d d = wp.target - pos;
    const double dist = d.norm();
    const double step_len = wp.speed * dt_;
    if (dist <= step_len || dist < 1e-9) {
      true_pose_ = Pose2D(wp.target.x(), wp.target.y(),
                          dist > 1e-9 ? std::atan2(d.y(), d.x()) : true_pose_.theta);
      if (wp.halt_s > 0.0) wp_halt_until_ = t_ + dt_ + wp.halt_s;
      ++wp_index_;
      if (wp_index_ >= script_.waypoints.size()) finished_ = true;
    } else {
      const double heading = std::atan2(d.y(), d.x());
      true_pose_ = Pose2D(pos.x() + step_len * d.x() / dist, pos.y() + step_len * d.y() / dist,
                          heading);
    }
  }

  // Odometry: true increment corrupted by scale bias and heading drift.
  MotionIncrement inc = odometry_motion_model(prev_true, true_pose_);
  if (inc.trans > 0.0) {
    const double sq = std::sqrt(inc.trans);
    const double heading_err =
        noise_.odom_rot_bias * inc.trans + gauss(noise_.odom_rot_sigma * sq);
    inc.trans = std::max(0.0, inc.trans * (1.0 + noise_.odom_trans_bias) +
                                  gauss(noise_.odom_trans_sigma * sq));
    inc.rot1 = wrap_angle(inc.rot1 + heading_err);
  }
  odom_pose_ = apply_increment(odom_pose_, inc);

  t_ += dt_;
  last_v_trans_ = std::hypot(true_pose_.x - prev_true.x, true_pose_.y - prev_true.y) / dt_;
  last_v_rot_ = angle_diff(true_pose_.theta, prev_true.theta) / dt_;

  out.t = t_;
  out.truth = true_pose_;
  out.odom = odom_pose_;
  out.v_trans = last_v_trans_;
  out.v_rot = last_v_rot_;
  out.halted = halt_now;
  out.finished = finished_;
  return out;
}

std::vector<RadarFrame> Simulator::synth_radar_frames(const std::vector<RadarSensorConfig>& sensors) {
  std::vector<RadarFrame> frames;
  frames.reserve(sensors.size());
  const Transform2D robot_tf = pose_to_transform(true_pose_);

  for (const auto& cfg : sensors) {
    const Transform2D sensor_tf = compose(robot_tf, pose_to_transform(cfg.mount));
    const Eigen::Vector2d sensor_pos = sensor_tf.translation();
    const double sensor_heading = sensor_tf.rotation();

    RadarFrame frame;
    frame.sensor_id = cfg.id;
    frame.bin_resolution = kDefaultBinResolution;
    const int bins = static_cast<int>(std::ceil(cfg.max_range / frame.bin_resolution)) + 1;
    frame.amplitudes.assign(bins, 0.0);

    auto add_bump = [&](double range, double amplitude) {
      const double center = (range + gauss(noise_.radar_range_sigma)) / frame.bin_resolution;
      constexpr double kBumpSigmaBins = 4.0;
      const int lo = std::max(0, static_cast<int>(std::floor(center - 4.0 * kBumpSigmaBins)));
      const int hi = std::min(bins - 1, static_cast<int>(std::ceil(center + 4.0 * kBumpSigmaBins)));
      for (int i = lo; i <= hi; ++i) {
        const double z = (i - center) / kBumpSigmaBins;
        frame.amplitudes[i] += amplitude * std::exp(-0.5 * z * z);
      }
    };

    auto visible = [&](const Eigen::Vector2d& target, double* range_out) {
      const Eigen::Vector2d rel = target - sensor_pos;
      const double d = rel.norm();
      if (d < 1e-9 || d > cfg.max_range) return false;
      const double bearing = angle_diff(std::atan2(rel.y(), rel.x()), sensor_heading);
      if (std::abs(bearing) > cfg.fov_halfangle) return false;
      if (world_.occluded(sensor_pos, target)) return false;
      *range_out = d;
      return true;
    };

    for (const auto& feature : world_.features) {
      double d = 0.0;
      if (visible(feature.position, &d)) add_bump(d, feature.rcs / (1.0 + d * d));
    }
    for (const auto& wall : world_.walls) {
      const Eigen::Vector2d p = closest_point_on_segment(sensor_pos, wall.a, wall.b);
      double d = 0.0;
      // Specular return from the nearest wall point; the wall occludes
      // everything behind itself but not its own return.
      const Eigen::Vector2d rel = p - sensor_pos;
      const double dist = rel.norm();
      if (dist < 1e-9 || dist > cfg.max_range) continue;
      const double bearing = angle_diff(std::atan2(rel.y(), rel.x()), sensor_heading);
      if (std::abs(bearing) > cfg.fov_halfangle) continue;
      (void)d;
      add_bump(dist, wall.rcs / (1.0 + dist * dist));
    }
    for (const auto& disc : world_.clutter) {
      const Eigen::Vector2d rel = disc.center - sensor_pos;
      const double d = rel.norm();
      const double bearing = angle_diff(std::atan2(rel.y(), rel.x()), sensor_heading);
      if (std::abs(bearing) > cfg.fov_halfangle + 0.2) continue;
      const int lo = std::max(0, static_cast<int>((d - disc.radius) / frame.bin_resolution));
      const int hi = std::min(bins - 1, static_cast<int>((d + disc.radius) / frame.bin_resolution));
      for (int i = lo; i <= hi; ++i) {
        frame.amplitudes[i] += disc.intensity * uniform_(rng_);
      }
    }
    if (noise_.radar_amp_sigma > 0.0) {
      for (double& a : frame.amplitudes) a += gauss(noise_.radar_amp_sigma);
    }
    for (double& a : frame.amplitudes) a = quantize(a);
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<AoaReading> Simulator::synth_aoa_readings(const AnchorRingConfig& ring) {
  std::vector<AoaReading> readings;
  const Transform2D robot_tf = pose_to_transform(true_pose_);
  constexpr double kFpRssi = -85.0;

  auto near_occluder = [&](const Eigen::Vector2d& p) {
    for (const auto& w : world_.walls) {
      if ((closest_point_on_segment(p, w.a, w.b) - p).norm() <= noise_.ghost_occluder_dist) {
        return true;
      }
    }
    return false;
  };

  auto emit_from_ring = [&](const Eigen::Vector2d& rel_robot, int tag_id, bool is_ghost,
                            bool nlos) {
    for (int a = 0; a < ring.num_anchors; ++a) {
      const Eigen::Vector2d anchor_pos(ring.ring_radius * std::cos(ring.psi[a]),
                                       ring.ring_radius * std::sin(ring.psi[a]));
      const Eigen::Vector2d rel = rel_robot - anchor_pos;
      const double c = std::cos(ring.psi[a]);
      const double s = std::sin(ring.psi[a]);
      const Eigen::Vector2d local(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y());
      const double d = local.norm();
      double phi = std::atan2(local.y(), local.x());
      if (std::abs(phi) > ring.fov / 2.0) continue;
      if (d < ring.det_range_min || d > ring.det_range_max) continue;

      AoaReading r;
      r.anchor_id = a;
      r.tag_id = tag_id;
      r.range = std::max(0.0, d + gauss(noise_.aoa_range_sigma));
      phi += gauss(noise_.aoa_bearing_sigma);
      r.bearing = std::clamp(phi, -ring.fov / 2.0, ring.fov / 2.0);
      r.fp_rssi = kFpRssi;
      const double delta = nlos ? std::max(6.5, noise_.rssi_nlos_delta + gauss(noise_.rssi_sigma))
                                : std::min(5.9, noise_.rssi_los_delta + gauss(noise_.rssi_sigma));
      r.rx_rssi = kFpRssi + delta;
      r.v_trans = last_v_trans_;
      r.v_rot = last_v_rot_;
      r.t = t_;
      r.ghost = is_ghost;
      readings.push_back(r);
      if (is_ghost) return;  // one anchor suffices for a ghost
    }
  };

  const Eigen::Vector2d robot_pos(true_pose_.x, true_pose_.y);
  for (const auto& tag : world_.tags) {
    const Eigen::Vector2d rel_robot = transform_to_local(true_pose_, tag.position);
    const bool nlos = world_.occluded(robot_pos, tag.position);
    emit_from_ring(rel_robot, tag.id, false, nlos);

    if (noise_.p_ghost > 0.0 && (near_occluder(robot_pos) || near_occluder(tag.position)) &&
        uniform_(rng_) < noise_.p_ghost) {
      // Front-back mirrored ghost with some radial jitter.
      const double beta = std::atan2(rel_robot.y(), rel_robot.x());
      const double ghost_beta = wrap_angle(M_PI - beta);
      const double ghost_range = std::max(0.2, rel_robot.norm() + gauss(0.3));
      const Eigen::Vector2d ghost_rel(ghost_range * std::cos(ghost_beta),
                                      ghost_range * std::sin(ghost_beta));
      emit_from_ring(ghost_rel, tag.id, true, false);
    }
  }
  (void)robot_tf;
  return readings;
}

}  // namespace uwbslam
