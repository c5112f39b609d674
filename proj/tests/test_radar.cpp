#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "uwbslam/radar.hpp"

using namespace uwbslam;

namespace {

RadarFrame frame_of(std::vector<double> amps) {
  RadarFrame f;
  f.sensor_id = "s";
  f.amplitudes = std::move(amps);
  return f;
}

}  // namespace

TEST_CASE("bin_to_range uses the bin resolution") {
  CHECK(bin_to_range(100, 0.0064) == doctest::Approx(0.64));
  CHECK(bin_to_range(0, 0.0064) == doctest::Approx(0.0));
}

TEST_CASE("rectify takes absolute values") {
  const RadarFrame f = rectify(frame_of({-1.0, 0.5, -0.25, 0.0}));
  CHECK(f.amplitudes == std::vector<double>{1.0, 0.5, 0.25, 0.0});
}

TEST_CASE("savgol reproduces polynomials up to the fit order exactly") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  for (auto [window, order] : {std::pair{5, 2}, {11, 3}, {7, 2}}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> coeff;
      for (int k = 0; k <= order; ++k) coeff.push_back(c(rng));
      std::vector<double> amps(64);
      for (int i = 0; i < 64; ++i) {
        double v = 0.0;
        for (int k = order; k >= 0; --k) v = v * i + coeff[k];
        amps[i] = v;
      }
      const RadarFrame out = smooth(frame_of(amps), window, order);
      for (int i = 0; i < 64; ++i) {
        CHECK(out.amplitudes[i] == doctest::Approx(amps[i]).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("savgol unit impulse, window 5 order 2") {
  std::vector<double> amps(21, 0.0);
  amps[10] = 1.0;
  const RadarFrame out = smooth(frame_of(amps), 5, 2);
  // Center convolution weight 17/35.
  CHECK(out.amplitudes[10] == doctest::Approx(17.0 / 35.0).epsilon(1e-9));
  CHECK(out.amplitudes[9] == doctest::Approx(12.0 / 35.0).epsilon(1e-9));
  CHECK(out.amplitudes[8] == doctest::Approx(-3.0 / 35.0).epsilon(1e-9));
  CHECK(out.amplitudes[7] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("detect_peaks finds a lone bump at the right range") {
  std::vector<double> amps(200, 0.0);
  for (int i = -6; i <= 6; ++i) {
    amps[100 + i] = std::exp(-0.5 * (i / 2.0) * (i / 2.0));
  }
  const auto peaks = detect_peaks(frame_of(amps), 0.1, 10);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].bin == 100);
  CHECK(peaks[0].range == doctest::Approx(0.64));
  CHECK(peaks[0].amplitude == doctest::Approx(1.0));
}

TEST_CASE("detect_peaks suppresses the smaller of two close peaks") {
  std::vector<double> amps(60, 0.0);
  amps[20] = 1.0;
  amps[23] = 0.8;
  const auto peaks = detect_peaks(frame_of(amps), 0.1, 10);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].bin == 20);
}

TEST_CASE("detect_peaks respects the amplitude threshold and strict maxima") {
  std::vector<double> amps(60, 0.0);
  amps[10] = 0.05;            // below threshold
  amps[30] = 0.5;
  amps[31] = 0.5;             // plateau: not a strict local max
  amps[45] = 0.9;
  const auto peaks = detect_peaks(frame_of(amps), 0.1, 5);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].bin == 45);
}

TEST_CASE("detect_peaks output is sorted and pairwise separated") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> amps(300);
    for (auto& a : amps) a = u(rng);
    const int sep = 8;
    const auto peaks = detect_peaks(frame_of(amps), 0.3, sep);
    for (size_t i = 0; i < peaks.size(); ++i) {
      CHECK(peaks[i].amplitude > 0.3);
      // Re-scan: strict local maximum in the raw frame.
      const int b = peaks[i].bin;
      CHECK(amps[b] > amps[b - 1]);
      CHECK(amps[b] > amps[b + 1]);
      if (i > 0) CHECK(peaks[i].bin - peaks[i - 1].bin >= sep);
    }
  }
}

TEST_CASE("trilateration of a symmetric pair") {
  RadarSensorConfig a, b;
  a.id = "a";
  a.mount = Pose2D(0.0, 0.0, M_PI / 2.0);
  b.id = "b";
  b.mount = Pose2D(0.2, 0.0, M_PI / 2.0);
  a.min_range = b.min_range = 0.1;
  a.max_range = b.max_range = 6.0;
  const auto p = trilaterate(1.0, 1.0, a, b);
  REQUIRE(p.has_value());
  CHECK(p->position.x() == doctest::Approx(0.1));
  CHECK(p->position.y() == doctest::Approx(std::sqrt(1.0 - 0.01)));  // 0.99499
  CHECK(p->sensor_a == "a");
  CHECK(p->sensor_b == "b");
}

TEST_CASE("trilateration rejects circles that cannot intersect") {
  RadarSensorConfig a, b;
  a.mount = Pose2D(0.0, 0.0, M_PI / 2.0);
  b.mount = Pose2D(0.2, 0.0, M_PI / 2.0);
  a.min_range = b.min_range = 0.0;
  CHECK_FALSE(trilaterate(0.05, 0.05, a, b).has_value());  // sum < baseline
  CHECK_FALSE(trilaterate(5.0, 0.5, a, b).has_value());    // one inside the other
}

TEST_CASE("trilateration round-trips a point in both FOVs") {
  RadarSensorConfig a, b;
  a.mount = Pose2D(-0.1, 0.05, M_PI / 2.0);
  b.mount = Pose2D(0.25, -0.05, M_PI / 2.0);
  a.fov_halfangle = b.fov_halfangle = 1.2;
  a.min_range = b.min_range = 0.1;
  a.max_range = b.max_range = 10.0;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ux(-0.6, 0.8);
  std::uniform_real_distribution<double> uy(0.5, 5.0);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector2d truth(ux(rng), uy(rng));
    if (!in_fov(a, truth) || !in_fov(b, truth)) continue;
    const double ra = (truth - Eigen::Vector2d(a.mount.x, a.mount.y)).norm();
    const double rb = (truth - Eigen::Vector2d(b.mount.x, b.mount.y)).norm();
    const auto p = trilaterate(ra, rb, a, b);
    REQUIRE(p.has_value());
    CHECK((p->position - truth).norm() < 1e-9);
    ++tested;
  }
  CHECK(tested > 100);
}

TEST_CASE("in_fov honours the bearing cone") {
  RadarSensorConfig c;
  c.mount = Pose2D(0.0, 0.0, 0.0);
  c.fov_halfangle = M_PI / 4.0;
  CHECK(in_fov(c, {1.0, 0.0}));
  CHECK(in_fov(c, {1.0, 0.99}));        // just inside 45 degrees
  CHECK_FALSE(in_fov(c, {0.0, 1.0}));   // 90 degrees off boresight
  CHECK_FALSE(in_fov(c, {-1.0, 0.0}));  // behind
  CHECK_FALSE(in_fov(c, {0.0, 0.0}));   // degenerate: at the sensor center
}
