#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>

#include "uwbslam/feature_window.hpp"

using namespace uwbslam;

namespace {

// Reference clustering: O(n^2) union-find over the eps-graph of core points,
// border points attached afterwards. Canonical relabelling by smallest member
// index makes the comparison order-independent.
std::vector<int> dbscan_reference(const std::vector<Eigen::Vector2d>& points, double eps,
                                  int min_samples) {
  const int n = static_cast<int>(points.size());
  const double eps2 = eps * eps;
  std::vector<std::vector<int>> nb(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if ((points[i] - points[j]).squaredNorm() <= eps2) nb[i].push_back(j);
    }
  }
  std::vector<bool> core(n);
  for (int i = 0; i < n; ++i) core[i] = static_cast<int>(nb[i].size()) >= min_samples;

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (int j : nb[i]) {
      if (core[j]) parent[find(i)] = find(j);
    }
  }
  std::vector<int> labels(n, -1);
  for (int i = 0; i < n; ++i) {
    if (core[i]) labels[i] = find(i);
  }
  // Border points: attach to the cluster of the core neighbour with the
  // smallest index (matches deterministic first-discovery assignment only up
  // to relabelling, so assert cluster membership not identity for them).
  for (int i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (int j : nb[i]) {
      if (core[j]) {
        labels[i] = find(j);
        break;
      }
    }
  }
  return labels;
}

// Relabel clusters canonically by their first core member, so the comparison
// is independent of discovery order. Border points keep whatever cluster id
// they were attached to (remapped), since DBSCAN leaves their owner ambiguous
// when several clusters can reach them.
std::vector<int> canonical(const std::vector<int>& labels, const std::vector<bool>& core) {
  std::map<int, int> remap;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (core[i] && labels[i] >= 0 && !remap.count(labels[i])) {
      remap[labels[i]] = static_cast<int>(remap.size());
    }
  }
  std::vector<int> out(labels.size(), -1);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) out[i] = remap.at(labels[i]);
  }
  return out;
}

std::vector<Eigen::Vector2d> blob(const Eigen::Vector2d& center, int count, double spread,
                                  std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, spread);
  std::vector<Eigen::Vector2d> out;
  for (int i = 0; i < count; ++i) out.push_back(center + Eigen::Vector2d(g(rng), g(rng)));
  return out;
}

}  // namespace

TEST_CASE("should_accumulate thresholds displacement and rotation") {
  WindowConfig cfg;  // min_disp 5 mm / 2.5e-3 rad
  CHECK(should_accumulate(Pose2D(0, 0, 0), Pose2D(0.006, 0, 0), cfg));
  CHECK_FALSE(should_accumulate(Pose2D(0, 0, 0), Pose2D(0.001, 0, 0), cfg));
  CHECK(should_accumulate(Pose2D(0, 0, 0), Pose2D(0, 0, 0.003), cfg));
  CHECK_FALSE(should_accumulate(Pose2D(0, 0, 0), Pose2D(0, 0, 0.001), cfg));
  CHECK(should_accumulate(Pose2D(0, 0, 0), Pose2D(0.005, 0, 0), cfg));  // boundary inclusive
}

TEST_CASE("scan buffer evicts beyond capacity") {
  WindowConfig cfg;
  ScanBuffer buf(cfg.capacity());  // 150 + 50 + 50 = 250
  for (long i = 0; i < 250; ++i) {
    CHECK_FALSE(buf.push_scan(Pose2D(i * 0.01, 0, 0), {}, i));
  }
  CHECK(buf.size() == 250);
  CHECK(buf.push_scan(Pose2D(2.5, 0, 0), {}, 250));  // eviction signalled
  CHECK(buf.size() == 250);
  CHECK(buf.entries().front().instant == 1);
  CHECK(buf.entries().back().instant == 250);
}

TEST_CASE("dbscan separates two well-spaced blobs") {
  std::mt19937_64 rng(1);
  auto pts = blob({0.0, 0.0}, 12, 0.02, rng);
  auto b = blob({1.0, 0.0}, 12, 0.02, rng);
  pts.insert(pts.end(), b.begin(), b.end());
  const DbscanResult res = dbscan(pts, 0.2, 10);
  CHECK(res.num_clusters == 2);
  for (int i = 0; i < 12; ++i) CHECK(res.labels[i] == 0);
  for (int i = 12; i < 24; ++i) CHECK(res.labels[i] == 1);
}

TEST_CASE("dbscan marks sparse points as noise") {
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({i * 1.0, 0.0});
  const DbscanResult res = dbscan(pts, 0.2, 3);
  CHECK(res.num_clusters == 0);
  for (int l : res.labels) CHECK(l == -1);
}

TEST_CASE("dbscan matches the quadratic reference on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> npts(0, 200);
  std::uniform_real_distribution<double> coord(0.0, 4.0);
  std::uniform_real_distribution<double> ueps(0.1, 0.6);
  std::uniform_int_distribution<int> ms(2, 8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Eigen::Vector2d> pts;
    const int n = npts(rng);
    for (int i = 0; i < n; ++i) pts.push_back({coord(rng), coord(rng)});
    const double eps = ueps(rng);
    const int min_samples = ms(rng);
    const DbscanResult res = dbscan(pts, eps, min_samples);
    const std::vector<int> ref = dbscan_reference(pts, eps, min_samples);

    std::vector<bool> core(pts.size(), false);
    for (size_t i = 0; i < pts.size(); ++i) {
      int cnt = 0;
      for (size_t j = 0; j < pts.size(); ++j) {
        if ((pts[i] - pts[j]).squaredNorm() <= eps * eps) ++cnt;
      }
      core[i] = cnt >= min_samples;
    }
    const std::vector<int> got = canonical(res.labels, core);
    const std::vector<int> want = canonical(ref, core);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      // Noise/cluster partition must match exactly; core labels must match
      // exactly. A border point may legitimately be claimed by any cluster
      // with a core point in its eps-ball.
      CHECK((got[i] >= 0) == (want[i] >= 0));
      if (core[i]) {
        CHECK_MESSAGE(got[i] == want[i], "trial " << trial << " core point " << i);
      } else if (got[i] >= 0) {
        bool valid_owner = false;
        for (size_t j = 0; j < pts.size(); ++j) {
          if (core[j] && (pts[i] - pts[j]).squaredNorm() <= eps * eps && got[j] == got[i]) {
            valid_owner = true;
            break;
          }
        }
        CHECK_MESSAGE(valid_owner, "trial " << trial << " border point " << i);
      }
    }
  }
}

TEST_CASE("prominence annulus logic") {
  const Eigen::Vector2d c(0.0, 0.0);
  CHECK(prominence_test(c, {}, 0.30, 0.15));                       // vacuous
  CHECK(prominence_test(c, {{0.1, 0.0}}, 0.30, 0.15));             // inside r2: own cluster
  CHECK_FALSE(prominence_test(c, {{0.2, 0.0}}, 0.30, 0.15));       // in the annulus
  CHECK(prominence_test(c, {{0.5, 0.0}}, 0.30, 0.15));             // beyond r1
  CHECK_FALSE(prominence_test(c, {{0.0, 0.3}}, 0.30, 0.15));       // boundary d == r1 counts
  CHECK(prominence_test(c, {{0.15, 0.0}}, 0.30, 0.15));            // boundary d == r2 excluded
}

TEST_CASE("prominence is monotone in the annulus width") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 15; ++i) pts.push_back({u(rng), u(rng)});
    const Eigen::Vector2d c(u(rng), u(rng));
    // Widening the annulus (larger r1, smaller r2) can only flip true->false.
    if (!prominence_test(c, pts, 0.25, 0.18)) {
      CHECK_FALSE(prominence_test(c, pts, 0.30, 0.15));
    }
  }
}

TEST_CASE("extract_features waits for a full central window") {
  WindowConfig cfg;
  cfg.n = 5;
  cfg.m1 = 4;
  cfg.m2 = 3;
  cfg.w = 2;
  cfg.dbscan_min_samples = 3;
  ScanBuffer buf(cfg.capacity());
  for (long i = 0; i < cfg.n + cfg.m2 - 1; ++i) {
    buf.push_scan(Pose2D(i * 0.01, 0, 0), {}, i);
    CHECK_FALSE(extract_features(buf, cfg).has_value());
  }
  buf.push_scan(Pose2D(0.07, 0, 0), {}, 7);
  CHECK(extract_features(buf, cfg).has_value());
}

TEST_CASE("extract_features finds an isolated feature and ranges it from x_t") {
  WindowConfig cfg;
  cfg.n = 5;
  cfg.m1 = 2;
  cfg.m2 = 3;
  cfg.w = 2;
  cfg.dbscan_eps = 0.2;
  cfg.dbscan_min_samples = 3;
  ScanBuffer buf(cfg.capacity());
  const Eigen::Vector2d feature(2.0, 1.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.005);
  for (long i = 0; i < 10; ++i) {
    std::vector<Eigen::Vector2d> pts;
    pts.push_back(feature + Eigen::Vector2d(g(rng), g(rng)));
    buf.push_scan(Pose2D(i * 0.05, 0, 0), std::move(pts), i);
  }
  const auto fx = extract_features(buf, cfg);
  REQUIRE(fx.has_value());
  // Central window = entries [2, 7), reference x0 at entry 2, x_t at entry 4.
  CHECK(fx->x0.x == doctest::Approx(0.10));
  CHECK(fx->xt.x == doctest::Approx(0.20));
  REQUIRE(fx->observations.size() == 1);
  const Eigen::Vector2d rel = feature - Eigen::Vector2d(0.20, 0.0);
  CHECK(fx->observations[0].range == doctest::Approx(rel.norm()).epsilon(1e-2));
  CHECK(fx->observations[0].bearing == doctest::Approx(std::atan2(rel.y(), rel.x())).epsilon(1e-2));
  CHECK((fx->feature_points[0] - feature).norm() < 0.02);
}

TEST_CASE("extract_features drops a wall-like spread") {
  WindowConfig cfg;
  cfg.n = 5;
  cfg.m1 = 0;
  cfg.m2 = 3;
  cfg.w = 2;
  cfg.dbscan_eps = 0.2;
  cfg.dbscan_min_samples = 3;
  ScanBuffer buf(cfg.capacity());
  // A line of returns spaced 0.1 apart: clusters into one elongated blob whose
  // mean always has annulus neighbours, so prominence rejects it.
  for (long i = 0; i < 8; ++i) {
    std::vector<Eigen::Vector2d> pts;
    for (int k = 0; k < 10; ++k) pts.push_back({1.0 + 0.1 * k, 2.0});
    buf.push_scan(Pose2D(i * 0.05, 0, 0), std::move(pts), i);
  }
  const auto fx = extract_features(buf, cfg);
  REQUIRE(fx.has_value());
  CHECK(fx->observations.empty());
}

TEST_CASE("window config validation") {
  WindowConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.w = cfg.n;
  CHECK_THROWS(cfg.validate());
  cfg = WindowConfig{};
  cfg.r2 = cfg.r1;
  CHECK_THROWS(cfg.validate());
}
