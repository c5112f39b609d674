#include "uwbslam/ekf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uwbslam {

ObservationModel observation_model(const Pose2D& robot, const Eigen::Vector2d& landmark) {
  const double dx = landmark.x() - robot.x;
  const double dy = landmark.y() - robot.y;
  const double q = dx * dx + dy * dy;
  if (q < 1e-18) {
    throw std::domain_error("observation_model: landmark coincident with robot");
  }
  const double r = std::sqrt(q);
  ObservationModel m;
  m.range = r;
  m.bearing = wrap_angle(std::atan2(dy, dx) - robot.theta);
  m.jac_pose << -dx / r, -dy / r, 0.0,
                 dy / q, -dx / q, -1.0;
  m.jac_landmark << dx / r, dy / r,
                   -dy / q, dx / q;
  return m;
}

SlamState::SlamState() {
  mu_ = Eigen::VectorXd::Zero(3);
  sigma_ = Eigen::MatrixXd::Zero(3, 3);
}

Pose2D SlamState::robot_pose() const { return Pose2D(mu_(0), mu_(1), mu_(2)); }

void SlamState::reset_robot(const Pose2D& pose) {
  if (!registry_.empty()) throw std::logic_error("reset_robot: landmarks already exist");
  mu_(0) = pose.x;
  mu_(1) = pose.y;
  mu_(2) = wrap_angle(pose.theta);
}

std::optional<Eigen::Vector2d> SlamState::landmark_position(int id) const {
  for (const auto& rec : registry_) {
    if (rec.id == id) return Eigen::Vector2d(mu_(rec.index), mu_(rec.index + 1));
  }
  return std::nullopt;
}

std::optional<Eigen::Matrix2d> SlamState::landmark_covariance(int id) const {
  for (const auto& rec : registry_) {
    if (rec.id == id) return Eigen::Matrix2d(sigma_.block<2, 2>(rec.index, rec.index));
  }
  return std::nullopt;
}

std::optional<int> SlamState::find_tag(int tag_id) const {
  for (const auto& rec : registry_) {
    if (rec.kind == LandmarkKind::kTag && rec.tag_id == tag_id) return rec.id;
  }
  return std::nullopt;
}

void SlamState::symmetrize() { sigma_ = ((sigma_ + sigma_.transpose()) * 0.5).eval(); }

void SlamState::predict(const MotionIncrement& u, const MotionNoise& noise, int steps) {
  const double heading = mu_(2) + u.rot1;
  Eigen::Matrix3d g = Eigen::Matrix3d::Identity();
  g(0, 2) = -u.trans * std::sin(heading);
  g(1, 2) = u.trans * std::cos(heading);

  mu_(0) += u.trans * std::cos(heading);
  mu_(1) += u.trans * std::sin(heading);
  mu_(2) = wrap_angle(heading + u.rot2);

  const int d = dim();
  sigma_.topLeftCorner<3, 3>() =
      g * sigma_.topLeftCorner<3, 3>() * g.transpose() + steps * noise.matrix();
  if (d > 3) {
    sigma_.topRightCorner(3, d - 3) = g * sigma_.topRightCorner(3, d - 3);
    sigma_.bottomLeftCorner(d - 3, 3) = sigma_.topRightCorner(3, d - 3).transpose();
  }
  symmetrize();
}

void SlamState::apply_update(int lm_index, const RangeBearingObs& obs, const ObservationNoise& q) {
  const Eigen::Vector2d lm(mu_(lm_index), mu_(lm_index + 1));
  const ObservationModel model = observation_model(robot_pose(), lm);

  const int d = dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, d);
  h.block<2, 3>(0, 0) = model.jac_pose;
  h.block<2, 2>(0, lm_index) = model.jac_landmark;

  const Eigen::Matrix2d s = h * sigma_ * h.transpose() + q.matrix();
  const Eigen::MatrixXd k = sigma_ * h.transpose() * s.inverse();

  Eigen::Vector2d innovation(obs.range - model.range, wrap_angle(obs.bearing - model.bearing));
  mu_ += k * innovation;
  mu_(2) = wrap_angle(mu_(2));

  // Joseph form, expanded: P - KHP - (KHP)^T + KSK^T.
  const double trace_before = sigma_.trace();
  const Eigen::MatrixXd khp = k * (h * sigma_);
  sigma_ = sigma_ - khp - khp.transpose() + k * s * k.transpose();
  symmetrize();
  worst_trace_increase_ = std::max(worst_trace_increase_, sigma_.trace() - trace_before);
}

void SlamState::update_known(int id, const RangeBearingObs& obs, const ObservationNoise& q) {
  for (const auto& rec : registry_) {
    if (rec.id == id) {
      apply_update(rec.index, obs, q);
      return;
    }
  }
  throw std::out_of_range("update_known: unknown landmark id");
}

int SlamState::augment_landmark(const RangeBearingObs& obs, LandmarkKind kind,
                                const ObservationNoise& q) {
  if (obs.range <= 0.0) throw std::invalid_argument("augment_landmark: non-positive range");
  const double heading = mu_(2) + obs.bearing;
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const Eigen::Vector2d lm(mu_(0) + obs.range * c, mu_(1) + obs.range * s);

  // Jacobians of the inverse observation model.
  Eigen::Matrix<double, 2, 3> jr;
  jr << 1.0, 0.0, -obs.range * s,
        0.0, 1.0, obs.range * c;
  Eigen::Matrix2d jz;
  jz << c, -obs.range * s,
        s, obs.range * c;

  const int d = dim();
  Eigen::VectorXd mu2(d + 2);
  mu2 << mu_, lm;
  Eigen::MatrixXd sigma2 = Eigen::MatrixXd::Zero(d + 2, d + 2);
  sigma2.topLeftCorner(d, d) = sigma_;
  const Eigen::MatrixXd cross = jr * sigma_.topRows<3>();
  sigma2.bottomLeftCorner(2, d) = cross;
  sigma2.topRightCorner(d, 2) = cross.transpose();
  sigma2.bottomRightCorner<2, 2>() =
      jr * sigma_.topLeftCorner<3, 3>() * jr.transpose() + jz * q.matrix() * jz.transpose();

  mu_ = std::move(mu2);
  sigma_ = std::move(sigma2);

  LandmarkRecord rec;
  rec.id = next_id_++;
  rec.kind = kind;
  rec.index = d;
  rec.tag_id = obs.tag_id;
  registry_.push_back(rec);
  symmetrize();
  return rec.id;
}

AssociationReport SlamState::associate_and_update_unknown(
    const std::vector<RangeBearingObs>& observations, const ObservationNoise& q, double alpha_r) {
  AssociationReport report;
  for (size_t oi = 0; oi < observations.size(); ++oi) {
    const auto& obs = observations[oi];
    AssociationEntry entry;
    entry.obs_index = static_cast<int>(oi);
    entry.min_m2 = std::numeric_limits<double>::infinity();

    // Registry scanned in ascending id order; strict < breaks ties low.
    std::vector<const LandmarkRecord*> points;
    for (const auto& rec : registry_) {
      if (rec.kind == LandmarkKind::kPoint) points.push_back(&rec);
    }
    std::sort(points.begin(), points.end(),
              [](const LandmarkRecord* a, const LandmarkRecord* b) { return a->id < b->id; });

    const LandmarkRecord* best = nullptr;
    for (const LandmarkRecord* rec : points) {
      const Eigen::Vector2d lm(mu_(rec->index), mu_(rec->index + 1));
      ObservationModel model;
      try {
        model = observation_model(robot_pose(), lm);
      } catch (const std::domain_error&) {
        continue;
      }
      const int d = dim();
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, d);
      h.block<2, 3>(0, 0) = model.jac_pose;
      h.block<2, 2>(0, rec->index) = model.jac_landmark;
      const Eigen::Matrix2d s = h * sigma_ * h.transpose() + q.matrix();
      const Eigen::Vector2d innovation(obs.range - model.range,
                                       wrap_angle(obs.bearing - model.bearing));
      const double m2 = innovation.dot(s.inverse() * innovation);
      if (m2 < entry.min_m2) {
        entry.min_m2 = m2;
        best = rec;
      }
    }

    if (best != nullptr && entry.min_m2 <= alpha_r) {
      entry.landmark_id = best->id;
      apply_update(best->index, obs, q);
    } else {
      entry.landmark_id = augment_landmark(obs, LandmarkKind::kPoint, q);
      entry.created = true;
    }
    report.entries.push_back(entry);
  }
  return report;
}

double SlamState::max_asymmetry() const {
  return (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
}

double SlamState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma_);
  return solver.eigenvalues().minCoeff();
}

}  // namespace uwbslam
