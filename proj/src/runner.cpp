#include "uwbslam/runner.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <fstream>
#include <optional>
#include <stdexcept>

namespace uwbslam {

using nlohmann::json;

void apply_mode(DriverConfig& cfg, const std::string& mode) {
  if (mode == "full") {
    cfg.enable_radar = true;
    cfg.enable_tags = true;
  } else if (mode == "radar_only") {
    cfg.enable_radar = true;
    cfg.enable_tags = false;
  } else if (mode == "aoa_only") {
    cfg.enable_radar = false;
    cfg.enable_tags = true;
  } else if (mode == "odom_only") {
    cfg.enable_radar = false;
    cfg.enable_tags = false;
  } else {
    throw std::invalid_argument("unknown mode '" + mode + "'");
  }
}

namespace {

void finalize(RunResult& result, const Driver& driver, const WorldModel* world,
              const std::string& mode, uint64_t seed, double runtime_s) {
  const auto& state = driver.state();
  result.audit = driver.audit();
  result.final_mu = state.mean();
  result.final_sigma = state.covariance();
  result.final_s = driver.update_count();
  for (const auto& rec : state.registry()) {
    result.landmarks.push_back(
        FinalLandmark{rec.id, rec.kind, rec.tag_id, *state.landmark_position(rec.id)});
  }
  if (world) {
    for (const auto& f : world->features) result.truth_landmarks.push_back(f.position);
  }
  for (const auto& [id, pos] : result.deployed_tags) result.truth_landmarks.push_back(pos);

  MetricsReport& m = result.metrics;
  m.mode = mode;
  m.seed = seed;
  m.config_hash = config_hash(driver.config());
  m.runtime_s = runtime_s;
  m.num_landmarks = static_cast<int>(result.landmarks.size());
  m.num_tags_deployed = static_cast<int>(result.deployed_tags.size());
  m.ghost_emitted = static_cast<int>(result.audit.ghost_emitted);
  m.ghost_accepted = static_cast<int>(result.audit.ghost_accepted);

  if (result.estimates.size() >= 2) {
    TrajectoryPair pair;
    for (size_t i = 0; i < result.estimates.size(); ++i) {
      pair.estimated.push_back({result.estimates[i].robot.x, result.estimates[i].robot.y});
      pair.ground_truth.push_back({result.truth_at_estimates[i].x, result.truth_at_estimates[i].y});
    }
    try {
      m.alignment = align_trajectories(pair);
      m.rms_ate = rms_ate(pair, m.alignment);
      std::vector<std::pair<int, Eigen::Vector2d>> est_lms;
      for (const auto& lm : result.landmarks) est_lms.emplace_back(lm.id, lm.position);
      m.landmark_errors =
          landmark_error(est_lms, result.truth_landmarks, m.alignment);
    } catch (const std::exception&) {
      m.rms_ate = std::numeric_limits<double>::quiet_NaN();
    }
    m.final_pose_error = (pair.estimated.back() - pair.ground_truth.back()).norm();
  }
}

}  // namespace

RunResult run_live(const Scenario& scenario, uint64_t seed, const std::string& mode,
                   const RunOptions& options) {
  DriverConfig cfg = scenario.driver;
  apply_mode(cfg, mode);

  Simulator sim(scenario.world, scenario.script, scenario.noise, scenario.dt, seed);
  Driver driver(cfg);
  driver.audit().check_covariance = options.check_covariance;
  RunResult result;

  std::optional<RunLogWriter> log;
  if (!options.log_path.empty()) log.emplace(options.log_path);

  std::optional<Pose2D> last_emit_odom;
  std::map<int, double> halt_spent;  // per-tag parked time budget

  // The estimate is delayed: update s tracks odometry instant s + w + 1, so
  // truth must be sampled at accumulation instants, not at the current step.
  std::vector<Pose2D> truth_by_instant;
  long seen_accumulations = -1;  // -1 until the baseline instant exists

  const auto wall_start = std::chrono::steady_clock::now();
  double t = 0.0;

  while (!sim.finished() && sim.time() < scenario.max_sim_s) {
    // Park the robot for tag initialization once the fresh tag is far enough
    // to fall inside the anchors' detection band.
    if (auto pending = driver.pending_tag_id()) {
      auto it = result.deployed_tags.find(*pending);
      if (it != result.deployed_tags.end()) {
        const double d = std::hypot(sim.true_pose().x - it->second.x(),
                                    sim.true_pose().y - it->second.y());
        double& spent = halt_spent[*pending];
        if (d >= cfg.ring.det_range_min + 0.2 && spent < options.init_halt_budget_s) {
          sim.request_halt(2.0 * scenario.dt);
          spent += scenario.dt;
        }
      }
    }

    const SimStep st = sim.step();
    if (st.finished && st.t <= 0.0) break;
    t = st.t;

    if (log) log->write(truth_to_json(t, st.truth, st.v_trans, st.v_rot));

    const bool emit = !last_emit_odom || should_accumulate(*last_emit_odom, st.odom, cfg.window);

    if (emit && cfg.enable_radar) {
      for (const auto& frame : sim.synth_radar_frames(cfg.radar_sensors)) {
        if (log && options.log_radar) log->write(radar_to_json(frame, t));
        driver.on_radar(frame, t);
      }
    }
    if (emit) last_emit_odom = st.odom;

    if (log) log->write(odom_to_json({t, st.odom}));
    const auto tick = driver.on_odom({t, st.odom});
    if (seen_accumulations < 0 || driver.accumulation_count() > seen_accumulations) {
      truth_by_instant.push_back(st.truth);
      seen_accumulations = driver.accumulation_count();
    }

    if (tick.deploy_request && cfg.enable_tags) {
      const int id = *tick.deploy_request;
      const Eigen::Vector2d pos(sim.true_pose().x, sim.true_pose().y);
      sim.world().deploy_tag(pos, id);
      result.deployed_tags[id] = pos;
      if (log) log->write(deploy_to_json(t, id, pos));
      driver.on_tag_deployed(id, t);
    }

    if (cfg.enable_tags && (emit || st.halted)) {
      for (const auto& reading : sim.synth_aoa_readings(cfg.ring)) {
        if (log) log->write(aoa_to_json(reading));
        driver.on_aoa(reading);
      }
    }

    if (tick.slam_updated) {
      result.estimates.push_back(driver.snapshot(t));
      const size_t tracked = static_cast<size_t>(driver.update_count() + cfg.window.w + 1);
      result.truth_at_estimates.push_back(truth_by_instant.at(tracked));
      if (log) log->write(est_to_json(result.estimates.back()));
    }
  }

  const double runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  result.final_t = t;
  if (log) {
    log->write(snapshot_to_json(driver.state(), t, driver.update_count()));
    log->flush();
  }
  finalize(result, driver, &sim.world(), mode, seed, runtime_s);
  return result;
}

RunResult run_replay(const std::vector<json>& records, const DriverConfig& cfg) {
  Driver driver(cfg);
  RunResult result;
  std::optional<Pose2D> last_truth;
  std::vector<Pose2D> truth_by_instant;
  long seen_accumulations = -1;
  double t = 0.0;

  const auto wall_start = std::chrono::steady_clock::now();
  for (const auto& rec : records) {
    const std::string type = rec.at("type").get<std::string>();
    if (type == "truth") {
      last_truth = Pose2D(rec.at("x").get<double>(), rec.at("y").get<double>(),
                          rec.at("theta").get<double>());
      t = rec.at("t").get<double>();
    } else if (type == "radar") {
      double rt = 0.0;
      const RadarFrame frame = radar_from_json(rec, &rt);
      driver.on_radar(frame, rt);
    } else if (type == "odom") {
      const OdomRecord odom = odom_from_json(rec);
      t = odom.t;
      const auto tick = driver.on_odom(odom);
      if (seen_accumulations < 0 || driver.accumulation_count() > seen_accumulations) {
        truth_by_instant.push_back(last_truth.value_or(Pose2D{}));
        seen_accumulations = driver.accumulation_count();
      }
      // Deployments replay from their own records; live-run requests are
      // not re-issued here.
      if (tick.slam_updated) {
        result.estimates.push_back(driver.snapshot(odom.t));
        const size_t tracked = static_cast<size_t>(driver.update_count() + cfg.window.w + 1);
        result.truth_at_estimates.push_back(truth_by_instant.at(tracked));
      }
    } else if (type == "aoa") {
      driver.on_aoa(aoa_from_json(rec));
    } else if (type == "deploy") {
      const int id = rec.at("tag_id").get<int>();
      const Eigen::Vector2d pos(rec.at("x").get<double>(), rec.at("y").get<double>());
      result.deployed_tags[id] = pos;
      driver.on_tag_deployed(id, rec.at("t").get<double>());
    }
    // est / snapshot records are outputs, not inputs.
  }
  const double runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  result.final_t = t;
  finalize(result, driver, nullptr, "replay", 0, runtime_s);
  return result;
}

RunResult run_replay_file(const std::string& log_path, const DriverConfig& cfg) {
  return run_replay(read_runlog(log_path), cfg);
}

json metrics_to_json(const MetricsReport& m) {
  json lms = json::array();
  for (const auto& e : m.landmark_errors) {
    lms.push_back(json{{"id", e.id}, {"error", e.error}, {"spurious", e.spurious}});
  }
  return json{{"mode", m.mode},
              {"seed", m.seed},
              {"config_hash", m.config_hash},
              {"rms_ate", m.rms_ate},
              {"final_pose_error", m.final_pose_error},
              {"num_landmarks", m.num_landmarks},
              {"num_tags_deployed", m.num_tags_deployed},
              {"ghost_emitted", m.ghost_emitted},
              {"ghost_accepted", m.ghost_accepted},
              {"runtime_s", m.runtime_s},
              {"alignment",
               {{"angle", m.alignment.angle()},
                {"tx", m.alignment.translation.x()},
                {"ty", m.alignment.translation.y()}}},
              {"landmark_errors", lms}};
}

void write_metrics(const MetricsReport& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_metrics: cannot open " + path);
  out << metrics_to_json(m).dump(2) << "\n";
}

void write_residuals_csv(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_residuals_csv: cannot open " + path);
  out << "t,gt_x,gt_y,est_x,est_y,err\n";
  for (size_t i = 0; i < result.estimates.size(); ++i) {
    const auto& est = result.estimates[i];
    const auto& gt = result.truth_at_estimates[i];
    const Eigen::Vector2d aligned =
        result.metrics.alignment.apply(Eigen::Vector2d(est.robot.x, est.robot.y));
    const double err = std::hypot(aligned.x() - gt.x, aligned.y() - gt.y);
    out << est.t << "," << gt.x << "," << gt.y << "," << aligned.x() << "," << aligned.y() << ","
        << err << "\n";
  }
}

}  // namespace uwbslam
