#include "uwbslam/feature_window.hpp"

#include <cmath>
#include <stdexcept>

namespace uwbslam {

void WindowConfig::validate() const {
  if (n <= 0 || m1 < 0 || m2 < 0) throw std::invalid_argument("window sizes must be positive");
  if (w >= n || w < 0) throw std::invalid_argument("w must satisfy 0 <= w < n");
  if (r2 >= r1 || r2 <= 0.0) throw std::invalid_argument("radii must satisfy 0 < r2 < r1");
  if (dbscan_eps <= 0.0 || dbscan_min_samples < 1) throw std::invalid_argument("bad DBSCAN parameters");
  if (min_disp_trans < 0.0 || min_disp_rot < 0.0) throw std::invalid_argument("negative displacement threshold");
}

bool ScanBuffer::push_scan(const Pose2D& pose, std::vector<Eigen::Vector2d> points, long instant) {
  entries_.push_back(ScanEntry{pose, std::move(points), instant});
  if (static_cast<int>(entries_.size()) > capacity_) {
    entries_.pop_front();
    return true;
  }
  return false;
}

bool should_accumulate(const Pose2D& prev, const Pose2D& next, const WindowConfig& cfg) {
  const double trans = std::hypot(next.x - prev.x, next.y - prev.y);
  const double rot = std::abs(angle_diff(next.theta, prev.theta));
  return trans >= cfg.min_disp_trans || rot >= cfg.min_disp_rot;
}

std::vector<std::vector<int>> DbscanResult::clusters() const {
  std::vector<std::vector<int>> out(num_clusters);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) out[labels[i]].push_back(static_cast<int>(i));
  }
  return out;
}

DbscanResult dbscan(const std::vector<Eigen::Vector2d>& points, double eps, int min_samples) {
  if (eps <= 0.0 || min_samples < 1) throw std::invalid_argument("dbscan: bad parameters");
  const int n = static_cast<int>(points.size());
  const double eps2 = eps * eps;
  constexpr int kUndefined = -2;
  constexpr int kNoise = -1;

  auto neighbors_of = [&](int i) {
    std::vector<int> nb;
    for (int j = 0; j < n; ++j) {
      if ((points[i] - points[j]).squaredNorm() <= eps2) nb.push_back(j);
    }
    return nb;
  };

  DbscanResult res;
  res.labels.assign(n, kUndefined);
  int cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (res.labels[i] != kUndefined) continue;
    std::vector<int> nb = neighbors_of(i);
    if (static_cast<int>(nb.size()) < min_samples) {
      res.labels[i] = kNoise;
      continue;
    }
    res.labels[i] = cluster;
    std::vector<int> queue = std::move(nb);
    for (size_t q = 0; q < queue.size(); ++q) {
      int j = queue[q];
      if (res.labels[j] == kNoise) res.labels[j] = cluster;  // border point
      if (res.labels[j] != kUndefined) continue;
      res.labels[j] = cluster;
      std::vector<int> nb2 = neighbors_of(j);
      if (static_cast<int>(nb2.size()) >= min_samples) {
        queue.insert(queue.end(), nb2.begin(), nb2.end());
      }
    }
    ++cluster;
  }
  res.num_clusters = cluster;
  return res;
}

bool prominence_test(const Eigen::Vector2d& center, const std::vector<Eigen::Vector2d>& window_points,
                     double r1, double r2) {
  if (r2 >= r1) throw std::invalid_argument("prominence_test: requires r2 < r1");
  const double r1sq = r1 * r1;
  const double r2sq = r2 * r2;
  for (const auto& p : window_points) {
    const double d2 = (p - center).squaredNorm();
    if (d2 <= r1sq && d2 > r2sq) return false;
  }
  return true;
}

std::optional<FeatureExtraction> extract_features(const ScanBuffer& buffer, const WindowConfig& cfg) {
  cfg.validate();
  const auto& entries = buffer.entries();
  const int len = static_cast<int>(entries.size());
  if (len < cfg.n + cfg.m2) return std::nullopt;

  const int central_begin = len - (cfg.n + cfg.m2);
  const int central_end = len - cfg.m2;

  std::vector<Eigen::Vector2d> central_points;
  std::vector<Eigen::Vector2d> all_points;
  for (int i = 0; i < len; ++i) {
    const auto& e = entries[i];
    all_points.insert(all_points.end(), e.points.begin(), e.points.end());
    if (i >= central_begin && i < central_end) {
      central_points.insert(central_points.end(), e.points.begin(), e.points.end());
    }
  }

  FeatureExtraction out;
  out.x0 = entries[central_begin].pose;
  out.xt = entries[central_begin + cfg.w].pose;

  DbscanResult clustering = dbscan(central_points, cfg.dbscan_eps, cfg.dbscan_min_samples);
  std::vector<Eigen::Vector2d> means;
  for (const auto& members : clustering.clusters()) {
    if (static_cast<int>(members.size()) < cfg.dbscan_min_samples) continue;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (int idx : members) mean += central_points[idx];
    mean /= static_cast<double>(members.size());
    if (prominence_test(mean, all_points, cfg.r1, cfg.r2)) means.push_back(mean);
  }

  // Merge duplicate candidates closer than r2 by averaging.
  std::vector<bool> used(means.size(), false);
  for (size_t i = 0; i < means.size(); ++i) {
    if (used[i]) continue;
    Eigen::Vector2d acc = means[i];
    int count = 1;
    for (size_t j = i + 1; j < means.size(); ++j) {
      if (!used[j] && (means[j] - means[i]).norm() < cfg.r2) {
        acc += means[j];
        ++count;
        used[j] = true;
      }
    }
    Eigen::Vector2d merged = acc / count;
    Eigen::Vector2d local = transform_to_local(out.xt, merged);
    PointFeatureObservation obs;
    obs.range = local.norm();
    obs.bearing = std::atan2(local.y(), local.x());
    if (obs.range <= 0.0) continue;
    out.observations.push_back(obs);
    out.feature_points.push_back(merged);
  }
  return out;
}

}  // namespace uwbslam
