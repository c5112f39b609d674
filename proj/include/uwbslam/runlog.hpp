#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwbslam/aoa.hpp"
#include "uwbslam/driver.hpp"
#include "uwbslam/ekf.hpp"
#include "uwbslam/geometry.hpp"
#include "uwbslam/radar.hpp"

namespace uwbslam {

// JSON-lines run log. One record per line, discriminated by "type":
//   meta, odom, truth, radar, aoa, feature, deploy, est, snapshot.
// Floats round-trip exactly (shortest-repr serialization).

nlohmann::json odom_to_json(const OdomRecord& r);
OdomRecord odom_from_json(const nlohmann::json& j);

nlohmann::json truth_to_json(double t, const Pose2D& pose, double v_trans, double v_rot);

nlohmann::json radar_to_json(const RadarFrame& frame, double t);
RadarFrame radar_from_json(const nlohmann::json& j, double* t);

nlohmann::json aoa_to_json(const AoaReading& r);
AoaReading aoa_from_json(const nlohmann::json& j);

nlohmann::json deploy_to_json(double t, int tag_id, const Eigen::Vector2d& true_position);

nlohmann::json est_to_json(const SlamSnapshot& snap);

nlohmann::json snapshot_to_json(const SlamState& state, double t, long s);

class RunLogWriter {
 public:
  explicit RunLogWriter(const std::string& path);
  void write(const nlohmann::json& record);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

std::vector<nlohmann::json> read_runlog(const std::string& path);

}  // namespace uwbslam
