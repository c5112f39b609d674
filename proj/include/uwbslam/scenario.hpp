#pragma once

#include <string>

#include <json.hpp>

#include "uwbslam/driver.hpp"
#include "uwbslam/simulator.hpp"

namespace uwbslam {

// Bundled world + trajectory + noise + pipeline parameters, loaded from one
// JSON scenario file with sections "world", "script", "noise", "driver".
struct Scenario {
  WorldModel world;
  TrajectoryScript script;
  NoiseConfig noise;
  DriverConfig driver;
  double dt = 0.1;
  double max_sim_s = 4000.0;

  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::string& path);
  nlohmann::json to_json() const;
};

nlohmann::json driver_config_to_json(const DriverConfig& cfg);
DriverConfig driver_config_from_json(const nlohmann::json& j);

// Dotted-path parameter override into the driver section, e.g.
// "alpha_r", "window.n", "q_t.sigma_r".
void set_driver_param(DriverConfig& cfg, const std::string& path, double value);

// Stable FNV-1a hash of the canonical config serialization.
std::string config_hash(const DriverConfig& cfg);

}  // namespace uwbslam
