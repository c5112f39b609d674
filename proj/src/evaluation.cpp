#include "uwbslam/evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uwbslam {

Rigid2D align_trajectories(const TrajectoryPair& pair) {
  const size_t n = pair.estimated.size();
  if (n < 2 || pair.ground_truth.size() != n) {
    throw std::invalid_argument("align_trajectories: need two equally sized trajectories");
  }
  Eigen::Vector2d mean_est = Eigen::Vector2d::Zero();
  Eigen::Vector2d mean_gt = Eigen::Vector2d::Zero();
  for (size_t i = 0; i < n; ++i) {
    mean_est += pair.estimated[i];
    mean_gt += pair.ground_truth[i];
  }
  mean_est /= static_cast<double>(n);
  mean_gt /= static_cast<double>(n);

  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  double spread = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e = pair.estimated[i] - mean_est;
    const Eigen::Vector2d g = pair.ground_truth[i] - mean_gt;
    cov += g * e.transpose();
    spread += e.squaredNorm() + g.squaredNorm();
  }
  if (spread < 1e-18) {
    throw std::invalid_argument("align_trajectories: degenerate (coincident) trajectories");
  }

  Eigen::JacobiSVD<Eigen::Matrix2d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(1, 1) = -1.0;
  Rigid2D t;
  t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  t.translation = mean_gt - t.rotation * mean_est;
  return t;
}

double rms_ate(const TrajectoryPair& pair, const Rigid2D& transform) {
  const size_t n = pair.estimated.size();
  if (n == 0 || pair.ground_truth.size() != n) {
    throw std::invalid_argument("rms_ate: trajectory size mismatch");
  }
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    acc += (transform.apply(pair.estimated[i]) - pair.ground_truth[i]).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(n));
}

std::vector<LandmarkError> landmark_error(const std::vector<std::pair<int, Eigen::Vector2d>>& estimated,
                                          const std::vector<Eigen::Vector2d>& truth,
                                          const Rigid2D& transform, double spurious_threshold) {
  std::vector<LandmarkError> out;
  out.reserve(estimated.size());
  for (const auto& [id, pos] : estimated) {
    const Eigen::Vector2d mapped = transform.apply(pos);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : truth) best = std::min(best, (mapped - t).norm());
    LandmarkError e;
    e.id = id;
    e.error = best;
    e.spurious = !(best <= spurious_threshold);
    out.push_back(e);
  }
  return out;
}

}  // namespace uwbslam
