#include "uwbslam/driver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uwbslam {

namespace {

double median_abs(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) v.push_back(std::abs(x));
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

}  // namespace

void DriverConfig::validate() const {
  window.validate();
  ring.validate();
  if (savgol_window % 2 == 0 || savgol_window <= savgol_polyorder) {
    throw std::invalid_argument("driver config: bad Savitzky-Golay parameters");
  }
  if (peak_threshold_factor <= 0.0) throw std::invalid_argument("driver config: bad peak threshold");
  if (eps_t <= 0.0 || n_t < 1) throw std::invalid_argument("driver config: bad tag DBSCAN parameters");
  if (alpha_t <= 0.0 || alpha_r <= 0.0) throw std::invalid_argument("driver config: bad gates");
  if (init_samples < 5) throw std::invalid_argument("driver config: init_samples too small");
  if (dep_dist <= 0.0) throw std::invalid_argument("driver config: bad dep_dist");
  for (const auto& pair : radar_pairs) {
    auto has = [&](const std::string& id) {
      return std::any_of(radar_sensors.begin(), radar_sensors.end(),
                         [&](const RadarSensorConfig& s) { return s.id == id; });
    };
    if (!has(pair.sensor_a) || !has(pair.sensor_b)) {
      throw std::invalid_argument("driver config: radar pair references unknown sensor");
    }
  }
}

DriverConfig DriverConfig::defaults() {
  DriverConfig cfg;
  // Two modules per side, overlapping FOVs for trilateration.
  auto make = [](const std::string& id, double x, double y, double theta) {
    RadarSensorConfig s;
    s.id = id;
    s.mount = Pose2D(x, y, theta);
    s.fov_halfangle = 1.0;
    s.min_range = 0.3;
    s.max_range = 4.5;
    return s;
  };
  // Wide pair baselines keep the two-circle intersection well conditioned:
  // lateral scatter goes like range * d(range) / baseline.
  cfg.radar_sensors = {make("L0", -0.20, 0.15, M_PI / 2.0), make("L1", 0.20, 0.15, M_PI / 2.0),
                       make("R0", -0.20, -0.15, -M_PI / 2.0), make("R1", 0.20, -0.15, -M_PI / 2.0)};
  cfg.radar_pairs = {{"L0", "L1"}, {"R0", "R1"}};
  return cfg;
}

Driver::Driver(DriverConfig cfg)
    : cfg_(std::move(cfg)), window_(cfg_.window.capacity()), monitor_(cfg_.dep_dist) {
  cfg_.validate();
}

void Driver::check_time(double t) {
  if (t < last_t_) throw std::invalid_argument("driver: out-of-order timestamp");
  last_t_ = t;
}

std::optional<int> Driver::pending_tag_id() const {
  if (!pending_init_) return std::nullopt;
  return pending_init_->tag_id;
}

void Driver::on_radar(const RadarFrame& frame, double t) {
  check_time(t);
  if (!cfg_.enable_radar) return;
  latest_frames_[frame.sensor_id] = frame;
}

void Driver::on_aoa(const AoaReading& reading) {
  check_time(reading.t);
  if (!cfg_.enable_tags) return;
  ++audit_.aoa_received;
  if (reading.ghost) ++audit_.ghost_emitted;

  if (std::abs(reading.bearing) > cfg_.ring.fov / 2.0 + 1e-12 ||
      reading.range < cfg_.ring.det_range_min || reading.range > cfg_.ring.det_range_max ||
      los_check(reading, cfg_.los_threshold_db) == LosState::kNlos) {
    ++audit_.aoa_gate_rejected;
    return;
  }

  const bool moving = motion_gate(cur_v_trans_, cur_v_rot_, cfg_.min_vel, cfg_.min_vel_rot);

  if (pending_init_ && reading.tag_id == pending_init_->tag_id) {
    if (!moving) {
      const Eigen::Vector2d p = anchor_to_robot_frame(reading, cfg_.ring);
      pending_init_->samples.push_back({p.norm(), std::atan2(p.y(), p.x())});
      maybe_initialize_tag(reading.t);
    }
    return;
  }

  if (!moving) {
    ++audit_.aoa_motion_rejected;
    return;
  }

  auto lm_id = state_.find_tag(reading.tag_id);
  if (!lm_id) return;  // not initialized yet

  if (!prev_odom_) return;
  const Eigen::Vector2d robot_pt = anchor_to_robot_frame(reading, cfg_.ring);
  TagBufferEntry entry;
  entry.point = transform_to_world(prev_odom_->pose, robot_pt);
  entry.odom_pose = prev_odom_->pose;
  entry.instant = instant_;
  entry.ghost = reading.ghost;
  entry.reading = reading;
  tag_buffers_[reading.tag_id].push(std::move(entry));
  ++audit_.aoa_buffered;
  if (!moving) audit_.buffered_while_halted = true;
}

void Driver::on_tag_deployed(int tag_id, double t) {
  check_time(t);
  pending_init_ = PendingInit{tag_id, {}};
  next_tag_id_ = std::max(next_tag_id_, tag_id + 1);
  ++audit_.deployments;
}

void Driver::maybe_initialize_tag(double t) {
  if (!pending_init_ || static_cast<int>(pending_init_->samples.size()) < cfg_.init_samples) return;
  try {
    // The filter pose lags by the window; carry it to the present through the
    // raw odometry before anchoring the new tag.
    Pose2D here = state_.robot_pose();
    if (prev_odom_) {
      const MotionIncrement fwd =
          odometry_motion_model(odom_instants_[prev_tracked_], prev_odom_->pose);
      here = apply_increment(here, fwd);
    }
    const TagInitResult init = initialize_tag(pending_init_->samples, here, cfg_.init_samples, 5);
    // Re-express relative to the (delayed) filter pose so augmentation lands
    // the tag at the right spot.
    const Eigen::Vector2d local = transform_to_local(state_.robot_pose(), init.position);
    RangeBearingObs obs;
    obs.range = local.norm();
    obs.bearing = std::atan2(local.y(), local.x());
    obs.kind = LandmarkKind::kTag;
    obs.tag_id = pending_init_->tag_id;
    ObservationNoise q_init;
    q_init.var_range = std::max(init.std_range * init.std_range, 1e-4);
    q_init.var_bearing = std::max(init.std_bearing * init.std_bearing, 1e-4);
    state_.augment_landmark(obs, LandmarkKind::kTag, q_init);
    tag_buffers_.emplace(pending_init_->tag_id, TagBuffer{});
    pending_init_.reset();
  } catch (const std::runtime_error&) {
    pending_init_->samples.clear();  // dispersed samples; keep collecting
  }
  (void)t;
}

Driver::TickResult Driver::on_odom(const OdomRecord& record) {
  check_time(record.t);
  TickResult result;

  if (prev_odom_) {
    const double dt = record.t - prev_odom_->t;
    if (dt > 1e-9) {
      cur_v_trans_ = std::hypot(record.pose.x - prev_odom_->pose.x,
                                record.pose.y - prev_odom_->pose.y) / dt;
      cur_v_rot_ = angle_diff(record.pose.theta, prev_odom_->pose.theta) / dt;
    }
  }

  if (!last_acc_odom_) {
    last_acc_odom_ = record;
    odom_instants_.push_back(record.pose);
    state_.reset_robot(record.pose);  // estimate lives in the odometry frame
    if (cfg_.enable_tags && !start_deploy_requested_) {
      // Rule of thumb: one tag goes down at the very beginning.
      start_deploy_requested_ = true;
      result.deploy_request = next_tag_id_;
    }
    prev_odom_ = record;
    return result;
  }

  if (should_accumulate(last_acc_odom_->pose, record.pose, cfg_.window)) {
    accumulate(record);
    if (instant_ > cfg_.window.n + cfg_.window.m2) {
      run_slam_update(record.t);
      result.slam_updated = true;

      if (cfg_.enable_tags && !pending_init_) {
        const double disp = std::hypot(record.pose.x - odom_instants_[instant_ - 1].x,
                                       record.pose.y - odom_instants_[instant_ - 1].y);
        const bool feature_seen =
            !extraction_log_.empty() && !extraction_log_.back().observations.empty();
        if (monitor_.update(disp, feature_seen)) {
          result.deploy_request = next_tag_id_;
        }
      }
    }
    last_acc_odom_ = record;
  }

  prev_odom_ = record;
  return result;
}

void Driver::accumulate(const OdomRecord& record) {
  ++instant_;
  ++audit_.accumulations;
  odom_instants_.push_back(record.pose);

  std::vector<Eigen::Vector2d> points;
  if (cfg_.enable_radar) {
    auto find_sensor = [&](const std::string& id) -> const RadarSensorConfig* {
      for (const auto& s : cfg_.radar_sensors) {
        if (s.id == id) return &s;
      }
      return nullptr;
    };
    auto peaks_of = [&](const RadarFrame& frame, const RadarSensorConfig& cfg) {
      std::vector<RadarPeak> out;
      if (static_cast<int>(frame.amplitudes.size()) < cfg_.savgol_window) return out;
      RadarFrame processed = smooth(rectify(frame), cfg_.savgol_window, cfg_.savgol_polyorder);
      const double threshold = std::max(cfg_.peak_threshold_factor * median_abs(processed.amplitudes),
                                        cfg_.peak_threshold_floor);
      for (const auto& p : detect_peaks(processed, threshold, cfg_.min_peak_separation_bins)) {
        if (p.range >= cfg.min_range && p.range <= cfg.max_range) out.push_back(p);
      }
      return out;
    };

    for (const auto& pair : cfg_.radar_pairs) {
      auto ita = latest_frames_.find(pair.sensor_a);
      auto itb = latest_frames_.find(pair.sensor_b);
      if (ita == latest_frames_.end() || itb == latest_frames_.end()) continue;
      const RadarSensorConfig* ca = find_sensor(pair.sensor_a);
      const RadarSensorConfig* cb = find_sensor(pair.sensor_b);
      const auto peaks_a = peaks_of(ita->second, *ca);
      const auto peaks_b = peaks_of(itb->second, *cb);
      for (const auto& pa : peaks_a) {
        for (const auto& pb : peaks_b) {
          if (auto tri = trilaterate(pa.range, pb.range, *ca, *cb)) {
            points.push_back(transform_to_world(record.pose, tri->position));
          }
        }
      }
    }
    latest_frames_.clear();
  }
  window_.push_scan(record.pose, std::move(points), instant_);
}

void Driver::run_slam_update(double t) {
  ++s_;
  const long tracked = s_ + cfg_.window.w + 1;
  const Pose2D& xt = odom_instants_[tracked];

  std::vector<RangeBearingObs> radar_obs;
  if (cfg_.enable_radar) {
    if (auto extraction = extract_features(window_, cfg_.window)) {
      for (const auto& f : extraction->observations) {
        RangeBearingObs obs;
        obs.range = f.range;
        obs.bearing = f.bearing;
        obs.kind = LandmarkKind::kPoint;
        radar_obs.push_back(obs);
      }
      extraction_log_.push_back(std::move(*extraction));
      if (extraction_log_.size() > 4) extraction_log_.erase(extraction_log_.begin());
    }
  }

  const MotionIncrement u =
      odometry_motion_model(odom_instants_[prev_tracked_], odom_instants_[tracked]);
  state_.predict(u, cfg_.motion_noise, static_cast<int>(tracked - prev_tracked_));
  prev_tracked_ = tracked;

  // Algorithm order: radar update precedes tag update.
  if (!radar_obs.empty()) {
    state_.associate_and_update_unknown(radar_obs, cfg_.q_r, cfg_.alpha_r);
  }

  if (cfg_.enable_tags) {
    const Pose2D ekf_pose = state_.robot_pose();
    for (auto& [tag_id, buffer] : tag_buffers_) {
      // Only the active span of the window; older points carry stale drift.
      buffer.prune(instant_ - (cfg_.window.n + cfg_.window.m2));
      if (buffer.size() == 0) continue;
      std::vector<Eigen::Vector2d> pts;
      pts.reserve(buffer.size());
      for (const auto& e : buffer.entries()) {
        // Redundant audit: nothing gate-violating may ever sit in a buffer.
        const auto& r = e.reading;
        if (std::abs(r.bearing) > cfg_.ring.fov / 2.0 + 1e-12 ||
            r.range < cfg_.ring.det_range_min || r.range > cfg_.ring.det_range_max ||
            los_check(r, cfg_.los_threshold_db) == LosState::kNlos ||
            !motion_gate(r, cfg_.min_vel, cfg_.min_vel_rot)) {
          ++audit_.buffer_gate_violations;
        }
        pts.push_back(e.point);
      }

      const auto lm_id = state_.find_tag(tag_id);
      std::optional<Eigen::Vector2d> estimate_odo;
      Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
      if (lm_id) {
        // Map the SLAM-frame estimate into the odometry frame the buffer
        // lives in, through the current pose pair.
        const Eigen::Vector2d est_slam = *state_.landmark_position(*lm_id);
        const Eigen::Vector2d rel = transform_to_local(ekf_pose, est_slam);
        estimate_odo = transform_to_world(xt, rel);
        // Gate width has to cover the robot's own uncertainty: position
        // directly, heading scaled by the lever arm to the tag.
        const Eigen::Matrix3d prr = state_.covariance().topLeftCorner<3, 3>();
        const double lever2 = rel.squaredNorm();
        cov = *state_.landmark_covariance(*lm_id) + prr.topLeftCorner<2, 2>() +
              (lever2 * prr(2, 2) + 0.01) * Eigen::Matrix2d::Identity();
      }

      std::vector<int> accepted;
      TagFilterReject reject = TagFilterReject::kNone;
      const auto centroid = filter_tag_observations(pts, cfg_.eps_t, cfg_.n_t, estimate_odo, cov,
                                                    cfg_.alpha_t, &accepted, &reject);
      switch (reject) {
        case TagFilterReject::kNoCluster: ++audit_.tag_rej_nocluster; break;
        case TagFilterReject::kMultiCluster: ++audit_.tag_rej_multicluster; break;
        case TagFilterReject::kGate: ++audit_.tag_rej_gate; break;
        case TagFilterReject::kNone: break;
      }
      if (centroid && lm_id) {
        for (int idx : accepted) {
          auto& e = buffer.entries()[idx];
          if (e.ghost && !e.ghost_counted) {
            e.ghost_counted = true;
            ++audit_.ghost_accepted;
          }
        }
        const Eigen::Vector2d local = transform_to_local(xt, *centroid);
        RangeBearingObs obs;
        obs.range = local.norm();
        obs.bearing = std::atan2(local.y(), local.x());
        obs.kind = LandmarkKind::kTag;
        obs.tag_id = tag_id;
        if (obs.range > 1e-6) {
          state_.update_known(*lm_id, obs, cfg_.q_t);
          ++audit_.tag_obs_accepted;
        }
      } else {
        ++audit_.tag_obs_rejected;
      }
    }
  }

  ++audit_.slam_updates;
  audit_.max_update_trace_increase =
      std::max(audit_.max_update_trace_increase, state_.worst_update_trace_increase());
  if (audit_.check_covariance) {
    audit_.max_cov_asymmetry = std::max(audit_.max_cov_asymmetry, state_.max_asymmetry());
    audit_.min_cov_eigenvalue = std::min(audit_.min_cov_eigenvalue, state_.min_eigenvalue());
  }
  trajectory_.push_back(snapshot(t));
}

SlamSnapshot Driver::snapshot(double t) const {
  SlamSnapshot snap;
  snap.t = t;
  snap.s = s_;
  snap.robot = state_.robot_pose();
  for (const auto& rec : state_.registry()) {
    snap.landmarks.emplace_back(rec.id, *state_.landmark_position(rec.id));
  }
  return snap;
}

}  // namespace uwbslam
