#include "uwbslam/radar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uwbslam {

double bin_to_range(int bin_index, double bin_resolution) {
  if (bin_index < 0) throw std::invalid_argument("bin_to_range: negative bin index");
  return bin_index * bin_resolution;
}

RadarFrame rectify(const RadarFrame& frame) {
  RadarFrame out = frame;
  for (double& a : out.amplitudes) a = std::abs(a);
  return out;
}

namespace {

// Least-squares fit of a degree-`polyorder` polynomial to `window` samples,
// evaluated at offset `at` within the window. Row of the smoother matrix.
Eigen::VectorXd savgol_row(int window, int polyorder, int at) {
  Eigen::MatrixXd a(window, polyorder + 1);
  for (int i = 0; i < window; ++i) {
    double v = 1.0;
    for (int j = 0; j <= polyorder; ++j) {
      a(i, j) = v;
      v *= static_cast<double>(i - at);
    }
  }
  // First row of (A^T A)^-1 A^T: the fitted polynomial's value at x = 0.
  Eigen::MatrixXd ata = a.transpose() * a;
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(polyorder + 1);
  e0(0) = 1.0;
  Eigen::VectorXd c = ata.ldlt().solve(e0);
  return a * c;
}

}  // namespace

RadarFrame smooth(const RadarFrame& frame, int window, int polyorder) {
  const int n = static_cast<int>(frame.amplitudes.size());
  if (window % 2 == 0 || window <= polyorder || polyorder < 0) {
    throw std::invalid_argument("smooth: window must be odd and > polyorder");
  }
  if (n < window) {
    throw std::invalid_argument("smooth: frame shorter than window");
  }
  const int half = window / 2;
  // Precompute one smoother row per in-window offset.
  std::vector<Eigen::VectorXd> rows(window);
  for (int at = 0; at < window; ++at) rows[at] = savgol_row(window, polyorder, at);

  RadarFrame out = frame;
  const Eigen::Map<const Eigen::VectorXd> y(frame.amplitudes.data(), n);
  for (int i = 0; i < n; ++i) {
    int start = std::clamp(i - half, 0, n - window);
    out.amplitudes[i] = rows[i - start].dot(y.segment(start, window));
  }
  return out;
}

std::vector<RadarPeak> detect_peaks(const RadarFrame& frame, double amplitude_threshold,
                                    int min_separation_bins) {
  if (amplitude_threshold <= 0.0) {
    throw std::invalid_argument("detect_peaks: threshold must be positive");
  }
  const auto& a = frame.amplitudes;
  const int n = static_cast<int>(a.size());
  std::vector<RadarPeak> candidates;
  for (int i = 1; i + 1 < n; ++i) {
    if (a[i] >= amplitude_threshold && a[i] > a[i - 1] && a[i] > a[i + 1]) {
      candidates.push_back({i, bin_to_range(i, frame.bin_resolution), a[i]});
    }
  }
  // Greedy suppression by descending amplitude, ties broken by lower bin.
  std::stable_sort(candidates.begin(), candidates.end(), [](const RadarPeak& l, const RadarPeak& r) {
    if (l.amplitude != r.amplitude) return l.amplitude > r.amplitude;
    return l.bin < r.bin;
  });
  std::vector<RadarPeak> kept;
  for (const auto& c : candidates) {
    bool ok = true;
    for (const auto& k : kept) {
      if (std::abs(c.bin - k.bin) < min_separation_bins) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const RadarPeak& l, const RadarPeak& r) { return l.bin < r.bin; });
  return kept;
}

bool in_fov(const RadarSensorConfig& cfg, const Eigen::Vector2d& p_robot) {
  Eigen::Vector2d local = transform_to_local(cfg.mount, p_robot);
  double d = local.norm();
  if (d < 1e-12) return false;
  double bearing = std::atan2(local.y(), local.x());
  return std::abs(bearing) <= cfg.fov_halfangle;
}

std::optional<TrilateratedPoint> trilaterate(double range_a, double range_b,
                                             const RadarSensorConfig& cfg_a,
                                             const RadarSensorConfig& cfg_b) {
  if (range_a <= 0.0 || range_b <= 0.0) {
    throw std::invalid_argument("trilaterate: ranges must be positive");
  }
  const Eigen::Vector2d pa(cfg_a.mount.x, cfg_a.mount.y);
  const Eigen::Vector2d pb(cfg_b.mount.x, cfg_b.mount.y);
  const double d = (pb - pa).norm();
  if (d < 1e-9) {
    throw std::invalid_argument("trilaterate: coincident sensor centers");
  }
  if (range_a + range_b < d || std::abs(range_a - range_b) > d) {
    return std::nullopt;  // circles disjoint or nested
  }
  const Eigen::Vector2d ex = (pb - pa) / d;
  const Eigen::Vector2d ey(-ex.y(), ex.x());
  const double along = (range_a * range_a - range_b * range_b + d * d) / (2.0 * d);
  double h2 = range_a * range_a - along * along;
  if (h2 < 0.0) h2 = 0.0;
  const double h = std::sqrt(h2);
  for (double sign : {+1.0, -1.0}) {
    Eigen::Vector2d p = pa + along * ex + sign * h * ey;
    if (in_fov(cfg_a, p) && in_fov(cfg_b, p)) {
      return TrilateratedPoint{p, cfg_a.id, cfg_b.id};
    }
  }
  return std::nullopt;
}

}  // namespace uwbslam
