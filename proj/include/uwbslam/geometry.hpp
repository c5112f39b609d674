#pragma once

#include <vector>

#include <Eigen/Dense>

namespace uwbslam {

// Angles are kept in the half-open interval (-pi, pi] everywhere.
double wrap_angle(double theta);

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // wrapped to (-pi, pi]

  Pose2D() = default;
  Pose2D(double x_, double y_, double theta_);
};

// 3x3 homogeneous transform with an orthonormal rotation block.
struct Transform2D {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  static Transform2D identity() { return Transform2D{}; }
  Eigen::Vector2d apply(const Eigen::Vector2d& p) const;
  Eigen::Vector2d translation() const { return m.block<2, 1>(0, 2); }
  double rotation() const;
  bool valid(double tol = 1e-9) const;
};

// T(theta_Z, D): rotation by theta_Z with translation D along the rotated
// x-axis, i.e. (D cos theta_Z, D sin theta_Z).
Transform2D make_transform(double theta_z, double d);

Transform2D compose(const Transform2D& a, const Transform2D& b);

// Pose as a robot->world transform (rotation theta, translation (x, y)).
Transform2D pose_to_transform(const Pose2D& pose);
Eigen::Vector2d transform_to_world(const Pose2D& pose, const Eigen::Vector2d& p_local);
Eigen::Vector2d transform_to_local(const Pose2D& pose, const Eigen::Vector2d& p_world);

// Standard rot1-trans-rot2 odometry decomposition.
struct MotionIncrement {
  double rot1 = 0.0;
  double trans = 0.0;  // >= 0
  double rot2 = 0.0;
};

MotionIncrement odometry_motion_model(const Pose2D& a, const Pose2D& b);
Pose2D apply_increment(const Pose2D& pose, const MotionIncrement& u);

struct CircularStats {
  double mean_theta = 0.0;
  double std_theta = 0.0;
  double resultant_r = 0.0;  // in [0, 1]
};

// Directional mean and dispersion: mean = atan2(y_bar, x_bar),
// std = sqrt(-2 ln R). Throws if the list is empty or R vanishes.
CircularStats circular_mean_std(const std::vector<double>& angles);

// Smallest signed difference a - b on the circle.
double angle_diff(double a, double b);

}  // namespace uwbslam
