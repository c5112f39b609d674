#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uwbslam/geometry.hpp"

namespace uwbslam {

enum class LandmarkKind { kTag, kPoint };

struct LandmarkRecord {
  int id = 0;
  LandmarkKind kind = LandmarkKind::kPoint;
  int index = 0;        // offset of the landmark's x entry in mu
  int tag_id = -1;      // external correspondence id, tags only
};

struct MotionNoise {
  double var_x = 1e-6;      // (1 mm)^2
  double var_y = 1e-6;
  double var_theta = 2.5e-5;  // (5e-3 rad)^2

  Eigen::Matrix3d matrix() const {
    return Eigen::Vector3d(var_x, var_y, var_theta).asDiagonal();
  }
};

struct ObservationNoise {
  double var_range = 0.0;
  double var_bearing = 0.0;

  Eigen::Matrix2d matrix() const {
    return Eigen::Vector2d(var_range, var_bearing).asDiagonal();
  }
  static ObservationNoise tag_default() { return {0.09, 1.0}; }     // sigma_r 30 cm
  static ObservationNoise radar_default() { return {0.04, 0.5}; }   // sigma_r 20 cm
};

struct RangeBearingObs {
  double range = 0.0;
  double bearing = 0.0;
  LandmarkKind kind = LandmarkKind::kPoint;
  int tag_id = -1;
};

struct ObservationModel {
  double range = 0.0;
  double bearing = 0.0;
  Eigen::Matrix<double, 2, 3> jac_pose;
  Eigen::Matrix2d jac_landmark;
};

// Predicted range/bearing and analytic Jacobians for one landmark.
ObservationModel observation_model(const Pose2D& robot, const Eigen::Vector2d& landmark);

struct AssociationEntry {
  int obs_index = 0;
  int landmark_id = -1;  // -1 means a new landmark was created
  double min_m2 = 0.0;
  bool created = false;
};

struct AssociationReport {
  std::vector<AssociationEntry> entries;
};

// Joint robot + landmark Gaussian state.
class SlamState {
 public:
  SlamState();

  Pose2D robot_pose() const;
  const Eigen::VectorXd& mean() const { return mu_; }
  const Eigen::MatrixXd& covariance() const { return sigma_; }
  const std::vector<LandmarkRecord>& registry() const { return registry_; }
  std::optional<Eigen::Vector2d> landmark_position(int id) const;
  std::optional<Eigen::Matrix2d> landmark_covariance(int id) const;
  std::optional<int> find_tag(int tag_id) const;
  int dim() const { return static_cast<int>(mu_.size()); }

  // Anchor the robot head of the state; meant for the very first odometry
  // record, before any landmark exists.
  void reset_robot(const Pose2D& pose);

  void predict(const MotionIncrement& u, const MotionNoise& noise, int steps = 1);

  // Known-correspondence range-bearing update against landmark `id`.
  void update_known(int id, const RangeBearingObs& obs, const ObservationNoise& q);

  // Nearest-neighbor association over point landmarks with a squared
  // Mahalanobis gate; unmatched observations become new landmarks.
  AssociationReport associate_and_update_unknown(const std::vector<RangeBearingObs>& observations,
                                                 const ObservationNoise& q, double alpha_r);

  int augment_landmark(const RangeBearingObs& obs, LandmarkKind kind, const ObservationNoise& q);

  // Diagnostics for the invariant suite.
  double max_asymmetry() const;
  double min_eigenvalue() const;
  // Largest trace(Sigma) growth ever produced by a measurement update.
  double worst_update_trace_increase() const { return worst_trace_increase_; }

 private:
  void symmetrize();
  void apply_update(int lm_index, const RangeBearingObs& obs, const ObservationNoise& q);

  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  std::vector<LandmarkRecord> registry_;
  int next_id_ = 0;
  double worst_trace_increase_ = 0.0;
};

}  // namespace uwbslam
