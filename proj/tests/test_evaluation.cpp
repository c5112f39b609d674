#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "uwbslam/evaluation.hpp"

using namespace uwbslam;

namespace {

TrajectoryPair square_pair() {
  TrajectoryPair p;
  p.ground_truth = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  p.estimated = p.ground_truth;
  return p;
}

Eigen::Matrix2d rot(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

}  // namespace

TEST_CASE("identical trajectories align with the identity") {
  const TrajectoryPair p = square_pair();
  const Rigid2D t = align_trajectories(p);
  CHECK((t.rotation - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(t.translation.norm() < 1e-12);
  CHECK(rms_ate(p, t) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a pure shift is recovered exactly") {
  TrajectoryPair p = square_pair();
  for (auto& e : p.estimated) e += Eigen::Vector2d(1.0, 2.0);
  const Rigid2D t = align_trajectories(p);
  CHECK(t.translation.x() == doctest::Approx(-1.0));
  CHECK(t.translation.y() == doctest::Approx(-2.0));
  CHECK(rms_ate(p, t) < 1e-12);
}

TEST_CASE("a rotation about the centroid is recovered") {
  TrajectoryPair p = square_pair();
  const Eigen::Vector2d c(0.5, 0.5);
  const Eigen::Matrix2d r = rot(M_PI / 6.0);
  for (auto& e : p.estimated) e = c + r * (e - c);
  const Rigid2D t = align_trajectories(p);
  CHECK(t.angle() == doctest::Approx(-M_PI / 6.0).epsilon(1e-9));
  CHECK(rms_ate(p, t) < 1e-9);
}

TEST_CASE("alternating lateral error of fixed magnitude gives that RMS") {
  TrajectoryPair p;
  // Sign pattern + - - + keeps the lateral error uncorrelated with the
  // along-track coordinate, so the optimal alignment is the identity.
  const double sign[4] = {1.0, -1.0, -1.0, 1.0};
  for (int i = 0; i < 40; ++i) {
    p.ground_truth.push_back({0.1 * i, 0.0});
    p.estimated.push_back({0.1 * i, 0.1 * sign[i % 4]});
  }
  // Zero-mean residuals: alignment cannot remove them.
  const Rigid2D t = align_trajectories(p);
  CHECK(rms_ate(p, t) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("rms_ate is invariant under a common rigid transform") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  TrajectoryPair p;
  for (int i = 0; i < 30; ++i) {
    p.ground_truth.push_back({u(rng), u(rng)});
    p.estimated.push_back(p.ground_truth.back() + 0.05 * Eigen::Vector2d(u(rng), u(rng)));
  }
  const double base = rms_ate(p, align_trajectories(p));
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Matrix2d r = rot(u(rng));
    const Eigen::Vector2d d(u(rng), u(rng));
    TrajectoryPair moved;
    for (size_t i = 0; i < p.estimated.size(); ++i) {
      moved.ground_truth.push_back(r * p.ground_truth[i] + d);
      moved.estimated.push_back(r * p.estimated[i] + d);
    }
    CHECK(rms_ate(moved, align_trajectories(moved)) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("alignment never beats the identity residual") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    TrajectoryPair p;
    for (int i = 0; i < 15; ++i) {
      p.ground_truth.push_back({u(rng), u(rng)});
      p.estimated.push_back({u(rng), u(rng)});
    }
    const double aligned = rms_ate(p, align_trajectories(p));
    const double identity = rms_ate(p, Rigid2D{});
    CHECK(aligned <= identity + 1e-12);
  }
}

TEST_CASE("degenerate coincident trajectories are rejected") {
  TrajectoryPair p;
  p.ground_truth = {{1, 1}, {1, 1}, {1, 1}};
  p.estimated = {{2, 2}, {2, 2}, {2, 2}};
  CHECK_THROWS(align_trajectories(p));
  CHECK_THROWS(align_trajectories(TrajectoryPair{}));
}

TEST_CASE("landmark errors against the nearest true feature") {
  const std::vector<Eigen::Vector2d> truth = {{2, 2}, {5, -2}, {8, 2.2}};
  std::vector<std::pair<int, Eigen::Vector2d>> est = {
      {0, {2.0, 2.0}}, {1, {5.05, -2.0}}, {2, {8.0, 2.25}}, {3, {20.0, 20.0}}};
  const auto errs = landmark_error(est, truth, Rigid2D{});
  REQUIRE(errs.size() == 4);
  CHECK(errs[0].error == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(errs[0].spurious);
  CHECK(errs[1].error == doctest::Approx(0.05));
  CHECK(errs[2].error == doctest::Approx(0.05));
  CHECK(errs[3].spurious);  // nothing within 1 m
  CHECK(errs[3].id == 3);
}

TEST_CASE("landmark errors honour the alignment transform") {
  const std::vector<Eigen::Vector2d> truth = {{1.0, 0.0}};
  // Estimate expressed in a frame rotated 90 degrees: (0, 1) maps onto (1, 0).
  Rigid2D t;
  t.rotation = rot(-M_PI / 2.0);
  const auto errs = landmark_error({{0, {0.0, 1.0}}}, truth, t);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].error < 1e-12);
}
