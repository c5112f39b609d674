#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uwbslam/geometry.hpp"

namespace uwbslam {

constexpr double kDefaultBinResolution = 0.0064;  // meters per bin

// One radar's raw amplitude time-series.
struct RadarFrame {
  std::string sensor_id;
  std::vector<double> amplitudes;
  double bin_resolution = kDefaultBinResolution;
};

struct RadarSensorConfig {
  std::string id;
  Pose2D mount;           // sensor pose in the robot frame
  double fov_halfangle = 1.0;
  double min_range = 0.3;
  double max_range = 6.0;
};

struct RadarPeak {
  int bin = 0;
  double range = 0.0;
  double amplitude = 0.0;
};

struct TrilateratedPoint {
  Eigen::Vector2d position;  // robot frame
  std::string sensor_a;
  std::string sensor_b;
};

double bin_to_range(int bin_index, double bin_resolution);

// Step (a): absolute values, in place semantics on a copy.
RadarFrame rectify(const RadarFrame& frame);

// Step (b): Savitzky-Golay smoothing. Edge samples are evaluated from the
// polynomial fitted to the nearest full window, so polynomials up to
// `polyorder` are reproduced exactly everywhere.
RadarFrame smooth(const RadarFrame& frame, int window, int polyorder);

// Step (c)+(d): strict local maxima above `amplitude_threshold`, greedily
// suppressed to a pairwise bin separation >= min_separation_bins (larger
// amplitude wins). Result sorted by bin.
std::vector<RadarPeak> detect_peaks(const RadarFrame& frame, double amplitude_threshold,
                                    int min_separation_bins);

// Step (e): intersect the two range circles around the sensor centers and
// return the solution lying inside both FOV cones, if any.
std::optional<TrilateratedPoint> trilaterate(double range_a, double range_b,
                                             const RadarSensorConfig& cfg_a,
                                             const RadarSensorConfig& cfg_b);

bool in_fov(const RadarSensorConfig& cfg, const Eigen::Vector2d& p_robot);

}  // namespace uwbslam
