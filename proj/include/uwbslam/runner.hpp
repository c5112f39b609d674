#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwbslam/driver.hpp"
#include "uwbslam/evaluation.hpp"
#include "uwbslam/runlog.hpp"
#include "uwbslam/scenario.hpp"
#include "uwbslam/simulator.hpp"

namespace uwbslam {

struct RunOptions {
  std::string log_path;    // empty disables logging
  bool log_radar = true;   // radar frames dominate log size
  bool check_covariance = false;  // per-update symmetry/eigenvalue audit
  double init_halt_budget_s = 60.0;  // max time spent parked per tag init
};

struct FinalLandmark {
  int id = 0;
  LandmarkKind kind = LandmarkKind::kPoint;
  int tag_id = -1;
  Eigen::Vector2d position;
};

struct RunResult {
  MetricsReport metrics;
  DriverAudit audit;

  std::vector<SlamSnapshot> estimates;     // one per SLAM update
  std::vector<Pose2D> truth_at_estimates;  // same indexing
  std::vector<FinalLandmark> landmarks;
  std::map<int, Eigen::Vector2d> deployed_tags;  // true positions
  std::vector<Eigen::Vector2d> truth_landmarks;  // features + deployed tags

  Eigen::VectorXd final_mu;
  Eigen::MatrixXd final_sigma;
  double final_t = 0.0;
  long final_s = 0;
};

// "full", "radar_only", "aoa_only", "odom_only".
void apply_mode(DriverConfig& cfg, const std::string& mode);

RunResult run_live(const Scenario& scenario, uint64_t seed, const std::string& mode,
                   const RunOptions& options = {});

// Re-drives the pipeline from a recorded log; no simulator involved.
RunResult run_replay(const std::vector<nlohmann::json>& records, const DriverConfig& cfg);
RunResult run_replay_file(const std::string& log_path, const DriverConfig& cfg);

nlohmann::json metrics_to_json(const MetricsReport& m);
void write_metrics(const MetricsReport& m, const std::string& path);
void write_residuals_csv(const RunResult& result, const std::string& path);

}  // namespace uwbslam
