#include "uwbslam/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uwbslam {

using nlohmann::json;

namespace {

Pose2D pose_from_json(const json& j) {
  return Pose2D(j.at("x").get<double>(), j.at("y").get<double>(), j.value("theta", 0.0));
}

json pose_to_json(const Pose2D& p) {
  return json{{"x", p.x}, {"y", p.y}, {"theta", p.theta}};
}

}  // namespace

json driver_config_to_json(const DriverConfig& cfg) {
  json sensors = json::array();
  for (const auto& s : cfg.radar_sensors) {
    sensors.push_back(json{{"id", s.id},
                           {"mount", pose_to_json(s.mount)},
                           {"fov_halfangle", s.fov_halfangle},
                           {"min_range", s.min_range},
                           {"max_range", s.max_range}});
  }
  json pairs = json::array();
  for (const auto& p : cfg.radar_pairs) pairs.push_back(json{{"a", p.sensor_a}, {"b", p.sensor_b}});

  return json{
      {"n", cfg.window.n},
      {"m1", cfg.window.m1},
      {"m2", cfg.window.m2},
      {"w", cfg.window.w},
      {"min_disp", cfg.window.min_disp_trans},
      {"min_disp_rot", cfg.window.min_disp_rot},
      {"r1", cfg.window.r1},
      {"r2", cfg.window.r2},
      {"eps_r", cfg.window.dbscan_eps},
      {"n_r", cfg.window.dbscan_min_samples},
      {"eps_t", cfg.eps_t},
      {"n_t", cfg.n_t},
      {"alpha_t", cfg.alpha_t},
      {"alpha_r", cfg.alpha_r},
      {"min_vel", cfg.min_vel},
      {"min_vel_rot", cfg.min_vel_rot},
      {"dep_dist", cfg.dep_dist},
      {"los_threshold_db", cfg.los_threshold_db},
      {"init_samples", cfg.init_samples},
      {"N_A", cfg.ring.num_anchors},
      {"r", cfg.ring.ring_radius},
      {"psi", cfg.ring.psi},
      {"phi_fov", cfg.ring.fov},
      {"det_range_min", cfg.ring.det_range_min},
      {"det_range_max", cfg.ring.det_range_max},
      {"savgol_window", cfg.savgol_window},
      {"savgol_polyorder", cfg.savgol_polyorder},
      {"peak_threshold_factor", cfg.peak_threshold_factor},
      {"peak_threshold_floor", cfg.peak_threshold_floor},
      {"min_peak_separation_bins", cfg.min_peak_separation_bins},
      {"sigma_x", std::sqrt(cfg.motion_noise.var_x)},
      {"sigma_y", std::sqrt(cfg.motion_noise.var_y)},
      {"sigma_theta", std::sqrt(cfg.motion_noise.var_theta)},
      {"qt_sigma_r", std::sqrt(cfg.q_t.var_range)},
      {"qt_sigma_phi2", cfg.q_t.var_bearing},
      {"qr_sigma_r", std::sqrt(cfg.q_r.var_range)},
      {"qr_sigma_phi2", cfg.q_r.var_bearing},
      {"enable_radar", cfg.enable_radar},
      {"enable_tags", cfg.enable_tags},
      {"radar_sensors", sensors},
      {"radar_pairs", pairs},
  };
}

DriverConfig driver_config_from_json(const json& j) {
  DriverConfig cfg = DriverConfig::defaults();
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("n", cfg.window.n);
  get("m1", cfg.window.m1);
  get("m2", cfg.window.m2);
  get("w", cfg.window.w);
  get("min_disp", cfg.window.min_disp_trans);
  get("min_disp_rot", cfg.window.min_disp_rot);
  get("r1", cfg.window.r1);
  get("r2", cfg.window.r2);
  get("eps_r", cfg.window.dbscan_eps);
  get("n_r", cfg.window.dbscan_min_samples);
  get("eps_t", cfg.eps_t);
  get("n_t", cfg.n_t);
  get("alpha_t", cfg.alpha_t);
  get("alpha_r", cfg.alpha_r);
  get("min_vel", cfg.min_vel);
  get("min_vel_rot", cfg.min_vel_rot);
  get("dep_dist", cfg.dep_dist);
  get("los_threshold_db", cfg.los_threshold_db);
  get("init_samples", cfg.init_samples);
  get("N_A", cfg.ring.num_anchors);
  get("r", cfg.ring.ring_radius);
  get("psi", cfg.ring.psi);
  get("phi_fov", cfg.ring.fov);
  get("det_range_min", cfg.ring.det_range_min);
  get("det_range_max", cfg.ring.det_range_max);
  get("savgol_window", cfg.savgol_window);
  get("savgol_polyorder", cfg.savgol_polyorder);
  get("peak_threshold_factor", cfg.peak_threshold_factor);
  get("peak_threshold_floor", cfg.peak_threshold_floor);
  get("min_peak_separation_bins", cfg.min_peak_separation_bins);
  get("enable_radar", cfg.enable_radar);
  get("enable_tags", cfg.enable_tags);
  if (j.contains("sigma_x")) cfg.motion_noise.var_x = std::pow(j.at("sigma_x").get<double>(), 2);
  if (j.contains("sigma_y")) cfg.motion_noise.var_y = std::pow(j.at("sigma_y").get<double>(), 2);
  if (j.contains("sigma_theta")) {
    cfg.motion_noise.var_theta = std::pow(j.at("sigma_theta").get<double>(), 2);
  }
  if (j.contains("qt_sigma_r")) cfg.q_t.var_range = std::pow(j.at("qt_sigma_r").get<double>(), 2);
  if (j.contains("qt_sigma_phi2")) cfg.q_t.var_bearing = j.at("qt_sigma_phi2").get<double>();
  if (j.contains("qr_sigma_r")) cfg.q_r.var_range = std::pow(j.at("qr_sigma_r").get<double>(), 2);
  if (j.contains("qr_sigma_phi2")) cfg.q_r.var_bearing = j.at("qr_sigma_phi2").get<double>();
  if (j.contains("radar_sensors")) {
    cfg.radar_sensors.clear();
    for (const auto& s : j.at("radar_sensors")) {
      RadarSensorConfig r;
      r.id = s.at("id").get<std::string>();
      r.mount = pose_from_json(s.at("mount"));
      r.fov_halfangle = s.value("fov_halfangle", 1.0);
      r.min_range = s.value("min_range", 0.3);
      r.max_range = s.value("max_range", 6.0);
      cfg.radar_sensors.push_back(r);
    }
  }
  if (j.contains("radar_pairs")) {
    cfg.radar_pairs.clear();
    for (const auto& p : j.at("radar_pairs")) {
      cfg.radar_pairs.push_back({p.at("a").get<std::string>(), p.at("b").get<std::string>()});
    }
  }
  cfg.validate();
  return cfg;
}

Scenario Scenario::from_json(const json& j) {
  Scenario sc;
  if (j.contains("world")) {
    const auto& w = j.at("world");
    for (const auto& f : w.value("features", json::array())) {
      sc.world.features.push_back(
          {{f.at("x").get<double>(), f.at("y").get<double>()}, f.value("rcs", 1.0)});
    }
    for (const auto& c : w.value("clutter", json::array())) {
      sc.world.clutter.push_back({{c.at("x").get<double>(), c.at("y").get<double>()},
                                  c.value("radius", 0.5),
                                  c.value("intensity", 0.05)});
    }
    for (const auto& s : w.value("walls", json::array())) {
      sc.world.walls.push_back({{s.at("x1").get<double>(), s.at("y1").get<double>()},
                                {s.at("x2").get<double>(), s.at("y2").get<double>()},
                                s.value("rcs", 0.3)});
    }
    for (const auto& t : w.value("tags", json::array())) {
      sc.world.tags.push_back({t.at("id").get<int>(),
                               {t.at("x").get<double>(), t.at("y").get<double>()}});
    }
  }
  if (j.contains("script")) {
    for (const auto& wp : j.at("script").value("waypoints", json::array())) {
      Waypoint w;
      w.target = {wp.at("x").get<double>(), wp.at("y").get<double>()};
      w.speed = wp.value("speed", 0.05);
      w.halt_s = wp.value("halt_s", 0.0);
      sc.script.waypoints.push_back(w);
    }
    sc.dt = j.at("script").value("dt", 0.1);
    sc.max_sim_s = j.at("script").value("max_sim_s", 4000.0);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    auto get = [&](const char* key, double& field) {
      if (n.contains(key)) field = n.at(key).get<double>();
    };
    get("odom_trans_bias", sc.noise.odom_trans_bias);
    get("odom_rot_bias", sc.noise.odom_rot_bias);
    get("odom_trans_sigma", sc.noise.odom_trans_sigma);
    get("odom_rot_sigma", sc.noise.odom_rot_sigma);
    get("radar_amp_sigma", sc.noise.radar_amp_sigma);
    get("radar_range_sigma", sc.noise.radar_range_sigma);
    get("aoa_range_sigma", sc.noise.aoa_range_sigma);
    get("aoa_bearing_sigma", sc.noise.aoa_bearing_sigma);
    get("p_ghost", sc.noise.p_ghost);
    get("ghost_occluder_dist", sc.noise.ghost_occluder_dist);
    get("rssi_los_delta", sc.noise.rssi_los_delta);
    get("rssi_nlos_delta", sc.noise.rssi_nlos_delta);
    get("rssi_sigma", sc.noise.rssi_sigma);
  }
  if (j.contains("driver")) sc.driver = driver_config_from_json(j.at("driver"));
  return sc;
}

json Scenario::to_json() const {
  json features = json::array();
  for (const auto& f : world.features) {
    features.push_back(json{{"x", f.position.x()}, {"y", f.position.y()}, {"rcs", f.rcs}});
  }
  json clutter = json::array();
  for (const auto& c : world.clutter) {
    clutter.push_back(json{{"x", c.center.x()}, {"y", c.center.y()}, {"radius", c.radius},
                           {"intensity", c.intensity}});
  }
  json walls = json::array();
  for (const auto& s : world.walls) {
    walls.push_back(json{{"x1", s.a.x()}, {"y1", s.a.y()}, {"x2", s.b.x()}, {"y2", s.b.y()},
                         {"rcs", s.rcs}});
  }
  json tags = json::array();
  for (const auto& t : world.tags) {
    tags.push_back(json{{"id", t.id}, {"x", t.position.x()}, {"y", t.position.y()}});
  }
  json waypoints = json::array();
  for (const auto& wp : script.waypoints) {
    waypoints.push_back(json{{"x", wp.target.x()}, {"y", wp.target.y()}, {"speed", wp.speed},
                             {"halt_s", wp.halt_s}});
  }
  return json{
      {"world", {{"features", features}, {"clutter", clutter}, {"walls", walls}, {"tags", tags}}},
      {"script", {{"waypoints", waypoints}, {"dt", dt}, {"max_sim_s", max_sim_s}}},
      {"noise",
       {{"odom_trans_bias", noise.odom_trans_bias},
        {"odom_rot_bias", noise.odom_rot_bias},
        {"odom_trans_sigma", noise.odom_trans_sigma},
        {"odom_rot_sigma", noise.odom_rot_sigma},
        {"radar_amp_sigma", noise.radar_amp_sigma},
        {"radar_range_sigma", noise.radar_range_sigma},
        {"aoa_range_sigma", noise.aoa_range_sigma},
        {"aoa_bearing_sigma", noise.aoa_bearing_sigma},
        {"p_ghost", noise.p_ghost},
        {"ghost_occluder_dist", noise.ghost_occluder_dist},
        {"rssi_los_delta", noise.rssi_los_delta},
        {"rssi_nlos_delta", noise.rssi_nlos_delta},
        {"rssi_sigma", noise.rssi_sigma}}},
      {"driver", driver_config_to_json(driver)},
  };
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("scenario " + path + ": " + e.what());
  }
  return from_json(j);
}

void set_driver_param(DriverConfig& cfg, const std::string& path, double value) {
  json j = driver_config_to_json(cfg);
  if (!j.contains(path)) {
    throw std::invalid_argument("set_driver_param: unknown parameter '" + path + "'");
  }
  if (j.at(path).is_number_integer()) {
    j[path] = static_cast<long>(std::llround(value));
  } else if (j.at(path).is_boolean()) {
    j[path] = value != 0.0;
  } else if (j.at(path).is_number()) {
    j[path] = value;
  } else {
    throw std::invalid_argument("set_driver_param: parameter '" + path + "' is not scalar");
  }
  cfg = driver_config_from_json(j);
}

std::string config_hash(const DriverConfig& cfg) {
  const std::string s = driver_config_to_json(cfg).dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace uwbslam
