#pragma once

#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uwbslam/aoa.hpp"
#include "uwbslam/ekf.hpp"
#include "uwbslam/feature_window.hpp"
#include "uwbslam/radar.hpp"

namespace uwbslam {

struct RadarPairConfig {
  std::string sensor_a;
  std::string sensor_b;
};

// All tunables of the pipeline in one validated record. Field names follow
// the conventional parameter names (min_disp, dep_dist, alpha_r, ...).
struct DriverConfig {
  WindowConfig window;
  AnchorRingConfig ring = AnchorRingConfig::defaults();
  std::vector<RadarSensorConfig> radar_sensors;
  std::vector<RadarPairConfig> radar_pairs;

  int savgol_window = 11;
  int savgol_polyorder = 3;
  double peak_threshold_factor = 3.0;
  double peak_threshold_floor = 0.02;
  int min_peak_separation_bins = 20;

  double min_vel = 0.03;       // m/s
  double min_vel_rot = 0.01;   // rad/s
  double dep_dist = 1.0;
  double los_threshold_db = 6.0;

  double eps_t = 0.05;
  int n_t = 10;
  double alpha_t = 4.0;
  double alpha_r = 1.0;
  int init_samples = 30;

  MotionNoise motion_noise;                                  // R
  ObservationNoise q_t = ObservationNoise::tag_default();
  ObservationNoise q_r = ObservationNoise::radar_default();

  bool enable_radar = true;
  bool enable_tags = true;

  void validate() const;
  static DriverConfig defaults();
};

struct SlamSnapshot {
  double t = 0.0;
  long s = 0;
  Pose2D robot;
  std::vector<std::pair<int, Eigen::Vector2d>> landmarks;
};

struct OdomRecord {
  double t = 0.0;
  Pose2D pose;
};

// Counters and worst-case diagnostics accumulated over a run.
struct DriverAudit {
  long aoa_received = 0;
  long aoa_motion_rejected = 0;
  long aoa_gate_rejected = 0;     // FOV / range / LOS
  long aoa_buffered = 0;
  long ghost_emitted = 0;
  long ghost_accepted = 0;        // ghost readings inside an accepted cluster
  long tag_obs_accepted = 0;
  long tag_obs_rejected = 0;
  long tag_rej_nocluster = 0;
  long tag_rej_multicluster = 0;
  long tag_rej_gate = 0;
  long slam_updates = 0;
  long accumulations = 0;
  long deployments = 0;
  double max_cov_asymmetry = 0.0;
  // +inf until the first checked update, so "never checked" is detectable.
  double min_cov_eigenvalue = std::numeric_limits<double>::infinity();
  double max_update_trace_increase = 0.0;
  long buffer_gate_violations = 0;  // buffered readings re-checked against the gates
  bool buffered_while_halted = false;
  bool check_covariance = false;  // expensive eigen checks per update
};

// Sequential orchestrator: displacement-gated radar accumulation, motion-
// gated AOA collection, window-ready detection, and the EKF update ordering
// (radar update before tag update within one step).
class Driver {
 public:
  explicit Driver(DriverConfig cfg);

  struct TickResult {
    bool slam_updated = false;
    std::optional<int> deploy_request;  // tag id to deploy
  };

  // Sensor inputs; timestamps must be non-decreasing.
  TickResult on_odom(const OdomRecord& record);
  void on_radar(const RadarFrame& frame, double t);
  void on_aoa(const AoaReading& reading);

  // The environment (live runner or replay) confirms a deployment.
  void on_tag_deployed(int tag_id, double t);

  bool tag_pending_init() const { return pending_init_.has_value(); }
  std::optional<int> pending_tag_id() const;

  const SlamState& state() const { return state_; }
  const DriverConfig& config() const { return cfg_; }
  const DriverAudit& audit() const { return audit_; }
  DriverAudit& audit() { return audit_; }
  const std::vector<SlamSnapshot>& trajectory() const { return trajectory_; }
  long accumulation_count() const { return instant_; }
  long update_count() const { return s_; }
  const std::vector<FeatureExtraction>& last_extractions() const { return extraction_log_; }

  SlamSnapshot snapshot(double t) const;

 private:
  void check_time(double t);
  void accumulate(const OdomRecord& record);
  void run_slam_update(double t);
  void maybe_initialize_tag(double t);

  DriverConfig cfg_;
  DriverAudit audit_;
  SlamState state_;
  ScanBuffer window_;
  DeploymentMonitor monitor_;

  std::map<std::string, RadarFrame> latest_frames_;
  std::map<int, TagBuffer> tag_buffers_;  // initialized tags only

  struct PendingInit {
    int tag_id = 0;
    std::vector<RangeBearing> samples;
  };
  std::optional<PendingInit> pending_init_;

  std::optional<OdomRecord> prev_odom_;
  std::optional<OdomRecord> last_acc_odom_;
  std::vector<Pose2D> odom_instants_;  // index 0 = first odometry pose
  double cur_v_trans_ = 0.0;
  double cur_v_rot_ = 0.0;

  long instant_ = 0;      // accumulation counter (i)
  long s_ = 0;            // SLAM update counter
  long prev_tracked_ = 0; // odometry instant of the previous EKF pose
  double last_t_ = -std::numeric_limits<double>::infinity();
  bool start_deploy_requested_ = false;
  int next_tag_id_ = 0;

  std::vector<SlamSnapshot> trajectory_;
  std::vector<FeatureExtraction> extraction_log_;
};

}  // namespace uwbslam
