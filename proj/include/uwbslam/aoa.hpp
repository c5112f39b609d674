#pragma once

#include <deque>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "uwbslam/geometry.hpp"

namespace uwbslam {

// Robot-mounted ring of AOA anchors.
struct AnchorRingConfig {
  int num_anchors = 4;
  double ring_radius = 0.10;                 // m
  std::vector<double> psi;                   // mounting angles, one per anchor
  double fov = 150.0 * M_PI / 180.0;         // azimuthal FOV per anchor
  double det_range_min = 1.5;
  double det_range_max = 10.0;

  double lambda() const { return 2.0 * M_PI / num_anchors; }
  static AnchorRingConfig defaults();
  void validate() const;
};

struct AoaReading {
  int anchor_id = 0;
  int tag_id = 0;
  double range = 0.0;    // D
  double bearing = 0.0;  // phi, anchor frame
  double fp_rssi = 0.0;
  double rx_rssi = 0.0;
  double v_trans = 0.0;  // robot speeds at capture
  double v_rot = 0.0;
  double t = 0.0;
  bool ghost = false;    // simulator provenance, never used for filtering
};

enum class LosState { kLos, kNlos };

// Eq-style composition T(psi, r) * T(phi, D) applied to the origin.
Eigen::Vector2d anchor_to_robot_frame(const AoaReading& reading, const AnchorRingConfig& ring);

// Radius of the annular coverage gap around the ring, as the closed form is
// written. Throws when the denominator is non-positive (uncovered geometry).
double deadzone_radius(const AnchorRingConfig& ring);

LosState los_check(const AoaReading& reading, double threshold_db = 6.0);

bool motion_gate(double v_trans, double v_rot, double min_vel_trans, double min_vel_rot);
bool motion_gate(const AoaReading& reading, double min_vel_trans, double min_vel_rot);

struct TagBufferEntry {
  Eigen::Vector2d point;  // odometry frame
  Pose2D odom_pose;
  long instant = 0;
  bool ghost = false;
  bool ghost_counted = false;  // bookkeeping for the provenance audit
  AoaReading reading;          // retained for gate audits
};

// Per-tag store of gate-surviving readings mapped into the odometry frame.
class TagBuffer {
 public:
  void push(TagBufferEntry entry) { entries_.push_back(std::move(entry)); }
  void prune(long min_instant);
  const std::deque<TagBufferEntry>& entries() const { return entries_; }
  std::deque<TagBufferEntry>& entries() { return entries_; }
  size_t size() const { return entries_.size(); }

 private:
  std::deque<TagBufferEntry> entries_;
};

// DBSCAN over the buffered points; the single cluster's centroid survives,
// subject to a squared Mahalanobis gate against the current tag estimate.
// Multiple clusters (ghosts formed a cluster) discard everything.
enum class TagFilterReject { kNone, kNoCluster, kMultiCluster, kGate };

std::optional<Eigen::Vector2d> filter_tag_observations(
    const std::vector<Eigen::Vector2d>& points, double eps, int min_samples,
    const std::optional<Eigen::Vector2d>& estimate, const Eigen::Matrix2d& estimate_cov,
    double alpha_t, std::vector<int>* accepted_indices = nullptr,
    TagFilterReject* reject = nullptr);

struct RangeBearing {
  double range = 0.0;
  double bearing = 0.0;
};

struct TagInitResult {
  Eigen::Vector2d position;  // mapped through the given robot pose
  double mean_range = 0.0;
  double mean_bearing = 0.0;
  double std_range = 0.0;
  double std_bearing = 0.0;
  int survivors = 0;
};

// Halted-robot initialization: circular statistics on bearings, arithmetic
// on ranges, mu +/- sigma survivor filter on both axes.
TagInitResult initialize_tag(const std::vector<RangeBearing>& samples, const Pose2D& robot_pose,
                             int min_samples = 30, int min_survivors = 5);

// Tracks travel distance since the last feature observation and signals when
// a tag should be deployed.
class DeploymentMonitor {
 public:
  explicit DeploymentMonitor(double dep_dist = 1.0) : dep_dist_(dep_dist) {}

  bool update(double displacement, bool feature_seen);
  double distance() const { return distance_; }

 private:
  double dep_dist_;
  double distance_ = 0.0;
};

}  // namespace uwbslam
