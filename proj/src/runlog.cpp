#include "uwbslam/runlog.hpp"

#include <stdexcept>

namespace uwbslam {

using nlohmann::json;

json odom_to_json(const OdomRecord& r) {
  return json{{"type", "odom"}, {"t", r.t}, {"x", r.pose.x}, {"y", r.pose.y}, {"theta", r.pose.theta}};
}

OdomRecord odom_from_json(const json& j) {
  OdomRecord r;
  r.t = j.at("t").get<double>();
  r.pose = Pose2D(j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>());
  return r;
}

json truth_to_json(double t, const Pose2D& pose, double v_trans, double v_rot) {
  return json{{"type", "truth"}, {"t", t},     {"x", pose.x},        {"y", pose.y},
              {"theta", pose.theta}, {"v_trans", v_trans}, {"v_rot", v_rot}};
}

json radar_to_json(const RadarFrame& frame, double t) {
  return json{{"type", "radar"},
              {"t", t},
              {"sensor_id", frame.sensor_id},
              {"bin_resolution", frame.bin_resolution},
              {"amplitudes", frame.amplitudes}};
}

RadarFrame radar_from_json(const json& j, double* t) {
  RadarFrame f;
  f.sensor_id = j.at("sensor_id").get<std::string>();
  f.bin_resolution = j.at("bin_resolution").get<double>();
  f.amplitudes = j.at("amplitudes").get<std::vector<double>>();
  if (t) *t = j.at("t").get<double>();
  return f;
}

json aoa_to_json(const AoaReading& r) {
  return json{{"type", "aoa"},       {"t", r.t},
              {"anchor_id", r.anchor_id}, {"tag_id", r.tag_id},
              {"D", r.range},        {"phi", r.bearing},
              {"fp_rssi", r.fp_rssi}, {"rx_rssi", r.rx_rssi},
              {"v_trans", r.v_trans}, {"v_rot", r.v_rot},
              {"ghost", r.ghost}};
}

AoaReading aoa_from_json(const json& j) {
  AoaReading r;
  r.t = j.at("t").get<double>();
  r.anchor_id = j.at("anchor_id").get<int>();
  r.tag_id = j.at("tag_id").get<int>();
  r.range = j.at("D").get<double>();
  r.bearing = j.at("phi").get<double>();
  r.fp_rssi = j.at("fp_rssi").get<double>();
  r.rx_rssi = j.at("rx_rssi").get<double>();
  r.v_trans = j.at("v_trans").get<double>();
  r.v_rot = j.at("v_rot").get<double>();
  r.ghost = j.value("ghost", false);
  return r;
}

json deploy_to_json(double t, int tag_id, const Eigen::Vector2d& true_position) {
  return json{{"type", "deploy"}, {"t", t}, {"tag_id", tag_id},
              {"x", true_position.x()}, {"y", true_position.y()}};
}

json est_to_json(const SlamSnapshot& snap) {
  return json{{"type", "est"}, {"t", snap.t}, {"s", snap.s},
              {"x", snap.robot.x}, {"y", snap.robot.y}, {"theta", snap.robot.theta}};
}

json snapshot_to_json(const SlamState& state, double t, long s) {
  std::vector<double> mu(state.mean().data(), state.mean().data() + state.mean().size());
  std::vector<double> sigma(state.covariance().data(),
                            state.covariance().data() + state.covariance().size());
  json landmarks = json::array();
  for (const auto& rec : state.registry()) {
    const auto pos = *state.landmark_position(rec.id);
    landmarks.push_back(json{{"id", rec.id},
                             {"kind", rec.kind == LandmarkKind::kTag ? "tag" : "point"},
                             {"tag_id", rec.tag_id},
                             {"x", pos.x()},
                             {"y", pos.y()}});
  }
  return json{{"type", "snapshot"}, {"t", t}, {"s", s},
              {"mu", mu}, {"sigma_flat", sigma}, {"landmarks", landmarks}};
}

RunLogWriter::RunLogWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("RunLogWriter: cannot open " + path);
}

void RunLogWriter::write(const json& record) { out_ << record.dump() << "\n"; }

std::vector<json> read_runlog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_runlog: cannot open " + path);
  std::vector<json> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error("read_runlog: parse error at line " + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return records;
}

}  // namespace uwbslam
