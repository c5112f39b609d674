#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace uwbslam {

struct TrajectoryPair {
  std::vector<Eigen::Vector2d> estimated;
  std::vector<Eigen::Vector2d> ground_truth;  // same indexing
};

struct Rigid2D {
  Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  Eigen::Vector2d apply(const Eigen::Vector2d& p) const { return rotation * p + translation; }
  double angle() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }
};

struct LandmarkError {
  int id = 0;
  double error = 0.0;
  bool spurious = false;  // no true feature/tag within 1 m
};

struct MetricsReport {
  double rms_ate = 0.0;
  double final_pose_error = 0.0;  // unaligned, meters
  std::vector<LandmarkError> landmark_errors;
  Rigid2D alignment;
  std::string mode;
  uint64_t seed = 0;
  std::string config_hash;
  int num_landmarks = 0;
  int num_tags_deployed = 0;
  int ghost_emitted = 0;
  int ghost_accepted = 0;
  double runtime_s = 0.0;
};

// Closed-form least-squares rigid alignment (centroids + SVD of the 2x2
// cross-covariance) mapping the estimated trajectory onto the ground truth.
Rigid2D align_trajectories(const TrajectoryPair& pair);

double rms_ate(const TrajectoryPair& pair, const Rigid2D& transform);

std::vector<LandmarkError> landmark_error(const std::vector<std::pair<int, Eigen::Vector2d>>& estimated,
                                          const std::vector<Eigen::Vector2d>& truth,
                                          const Rigid2D& transform,
                                          double spurious_threshold = 1.0);

}  // namespace uwbslam
