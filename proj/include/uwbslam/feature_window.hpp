#pragma once

#include <deque>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "uwbslam/geometry.hpp"

namespace uwbslam {

// Moving-window parameters (m1 history + n central + m2 incoming).
struct WindowConfig {
  int n = 50;
  int m1 = 150;
  int m2 = 50;
  int w = 2;
  double min_disp_trans = 0.005;  // m
  double min_disp_rot = 2.5e-3;   // rad
  double r1 = 0.30;               // outer isolation radius
  double r2 = 0.15;               // inner isolation radius
  double dbscan_eps = 0.20;
  int dbscan_min_samples = 10;

  int capacity() const { return m1 + n + m2; }
  void validate() const;
};

struct ScanEntry {
  Pose2D pose;  // odometry pose at the accumulation instant
  std::vector<Eigen::Vector2d> points;  // odometry frame
  long instant = 0;
};

// Pose-stamped scan accumulation with bounded capacity; oldest entries are
// evicted in a moving window fashion.
class ScanBuffer {
 public:
  explicit ScanBuffer(int capacity) : capacity_(capacity) {}

  bool push_scan(const Pose2D& pose, std::vector<Eigen::Vector2d> points, long instant);
  size_t size() const { return entries_.size(); }
  const std::deque<ScanEntry>& entries() const { return entries_; }

 private:
  int capacity_;
  std::deque<ScanEntry> entries_;
};

struct PointFeatureObservation {
  double range = 0.0;
  double bearing = 0.0;  // relative to x_t'
};

struct FeatureExtraction {
  Pose2D x0;  // window reference pose
  Pose2D xt;  // pose w instants after x0; observations are relative to it
  std::vector<PointFeatureObservation> observations;
  std::vector<Eigen::Vector2d> feature_points;  // odometry frame, for logging
};

struct DbscanResult {
  std::vector<int> labels;  // -1 noise, otherwise cluster index from 0
  int num_clusters = 0;

  std::vector<std::vector<int>> clusters() const;
};

bool should_accumulate(const Pose2D& prev, const Pose2D& next, const WindowConfig& cfg);

// Density-based clustering, Euclidean metric, deterministic in input order:
// clusters are numbered by first-discovered core point and border points go
// to the earliest-discovered reachable cluster.
DbscanResult dbscan(const std::vector<Eigen::Vector2d>& points, double eps, int min_samples);

// True iff the annulus r2 < d <= r1 around `center` contains no window point.
bool prominence_test(const Eigen::Vector2d& center, const std::vector<Eigen::Vector2d>& window_points,
                     double r1, double r2);

// Clusters the central n entries, isolates prominent cluster means against
// all window points, and expresses survivors as range/bearing from x_t'.
// Empty optional while the buffer holds fewer than n + m2 entries.
std::optional<FeatureExtraction> extract_features(const ScanBuffer& buffer, const WindowConfig& cfg);

}  // namespace uwbslam
