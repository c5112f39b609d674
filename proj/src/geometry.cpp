#include "uwbslam/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace uwbslam {

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  double t = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (t <= 0.0) t += 2.0 * M_PI;
  return t - M_PI;
}

Pose2D::Pose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

Eigen::Vector2d Transform2D::apply(const Eigen::Vector2d& p) const {
  Eigen::Vector3d h(p.x(), p.y(), 1.0);
  Eigen::Vector3d r = m * h;
  return {r.x(), r.y()};
}

double Transform2D::rotation() const { return std::atan2(m(1, 0), m(0, 0)); }

bool Transform2D::valid(double tol) const {
  Eigen::Matrix2d r = m.block<2, 2>(0, 0);
  if (std::abs(r.determinant() - 1.0) > tol) return false;
  if (((r.transpose() * r) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > 10 * tol) return false;
  return m(2, 0) == 0.0 && m(2, 1) == 0.0 && m(2, 2) == 1.0;
}

Transform2D make_transform(double theta_z, double d) {
  if (!std::isfinite(theta_z) || !std::isfinite(d)) {
    throw std::invalid_argument("make_transform: non-finite input");
  }
  const double c = std::cos(theta_z);
  const double s = std::sin(theta_z);
  Transform2D t;
  t.m << c, -s, d * c,
         s,  c, d * s,
         0,  0, 1;
  return t;
}

Transform2D compose(const Transform2D& a, const Transform2D& b) {
  Transform2D t;
  t.m = a.m * b.m;
  t.m.row(2) << 0, 0, 1;
  return t;
}

Transform2D pose_to_transform(const Pose2D& pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  Transform2D t;
  t.m << c, -s, pose.x,
         s,  c, pose.y,
         0,  0, 1;
  return t;
}

Eigen::Vector2d transform_to_world(const Pose2D& pose, const Eigen::Vector2d& p_local) {
  return pose_to_transform(pose).apply(p_local);
}

Eigen::Vector2d transform_to_local(const Pose2D& pose, const Eigen::Vector2d& p_world) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double dx = p_world.x() - pose.x;
  const double dy = p_world.y() - pose.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

MotionIncrement odometry_motion_model(const Pose2D& a, const Pose2D& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  MotionIncrement u;
  u.trans = std::hypot(dx, dy);
  if (u.trans < 1e-6) {
    // Degenerate decomposition at zero translation: all rotation into rot2.
    u.rot1 = 0.0;
    u.rot2 = wrap_angle(b.theta - a.theta);
    return u;
  }
  u.rot1 = wrap_angle(std::atan2(dy, dx) - a.theta);
  u.rot2 = wrap_angle(b.theta - a.theta - u.rot1);
  return u;
}

Pose2D apply_increment(const Pose2D& pose, const MotionIncrement& u) {
  const double h = pose.theta + u.rot1;
  return Pose2D(pose.x + u.trans * std::cos(h), pose.y + u.trans * std::sin(h),
                wrap_angle(h + u.rot2));
}

CircularStats circular_mean_std(const std::vector<double>& angles) {
  if (angles.empty()) {
    throw std::invalid_argument("circular_mean_std: empty angle list");
  }
  double xbar = 0.0;
  double ybar = 0.0;
  for (double a : angles) {
    xbar += std::cos(a);
    ybar += std::sin(a);
  }
  xbar /= static_cast<double>(angles.size());
  ybar /= static_cast<double>(angles.size());
  const double r = std::sqrt(xbar * xbar + ybar * ybar);
  if (r < 1e-12) {
    throw std::domain_error("circular_mean_std: perfectly dispersed angles, mean undefined");
  }
  CircularStats s;
  s.resultant_r = std::min(r, 1.0);
  s.mean_theta = wrap_angle(std::atan2(ybar, xbar));
  s.std_theta = s.resultant_r >= 1.0 ? 0.0 : std::sqrt(-2.0 * std::log(s.resultant_r));
  return s;
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

}  // namespace uwbslam
