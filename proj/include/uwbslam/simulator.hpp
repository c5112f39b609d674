#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "uwbslam/aoa.hpp"
#include "uwbslam/geometry.hpp"
#include "uwbslam/radar.hpp"

namespace uwbslam {

// Ground-truth world: isolated point reflectors, diffuse clutter discs,
// radar-reflective NLOS-occluding wall segments, and deployed tags.
struct WorldModel {
  struct Feature {
    Eigen::Vector2d position;
    double rcs = 1.0;
  };
  struct ClutterDisc {
    Eigen::Vector2d center;
    double radius = 0.5;
    double intensity = 0.05;
  };
  struct Wall {
    Eigen::Vector2d a;
    Eigen::Vector2d b;
    double rcs = 0.3;
  };
  struct Tag {
    int id = 0;
    Eigen::Vector2d position;
  };

  std::vector<Feature> features;
  std::vector<ClutterDisc> clutter;
  std::vector<Wall> walls;
  std::vector<Tag> tags;

  void deploy_tag(const Eigen::Vector2d& position, int tag_id);
  // True if the open segment p-q crosses any wall.
  bool occluded(const Eigen::Vector2d& p, const Eigen::Vector2d& q) const;
};

struct Waypoint {
  Eigen::Vector2d target;
  double speed = 0.05;   // m/s toward the target
  double halt_s = 0.0;   // pause on arrival
};

struct TrajectoryScript {
  std::vector<Waypoint> waypoints;
};

struct NoiseConfig {
  // Odometry drift: systematic biases plus per-sqrt-meter random walk.
  double odom_trans_bias = 0.0;     // fractional scale error
  double odom_rot_bias = 0.0;       // rad of heading drift per meter
  double odom_trans_sigma = 0.0;    // m per sqrt(m)
  double odom_rot_sigma = 0.0;      // rad per sqrt(m)
  // Radar.
  double radar_amp_sigma = 0.0;
  double radar_range_sigma = 0.0;   // m of jitter on bump centers
  // AOA.
  double aoa_range_sigma = 0.0;
  double aoa_bearing_sigma = 0.0;
  // Ghost model: extra mirrored readings near occluders.
  double p_ghost = 0.0;
  double ghost_occluder_dist = 1.5;
  // RSSI model (delta = rx - fp).
  double rssi_los_delta = 3.0;
  double rssi_nlos_delta = 12.0;
  double rssi_sigma = 0.5;
};

struct SimStep {
  double t = 0.0;
  Pose2D truth;
  Pose2D odom;
  double v_trans = 0.0;
  double v_rot = 0.0;
  bool halted = false;
  bool finished = false;
};

// Deterministic, seeded world stepping plus sensor synthesis. All randomness
// flows from the single seeded engine; identical inputs replay identically.
class Simulator {
 public:
  Simulator(WorldModel world, TrajectoryScript script, NoiseConfig noise, double dt, uint64_t seed);

  SimStep step();
  bool finished() const { return finished_; }
  const Pose2D& true_pose() const { return true_pose_; }
  const Pose2D& odom_pose() const { return odom_pose_; }
  WorldModel& world() { return world_; }
  const WorldModel& world() const { return world_; }
  double time() const { return t_; }

  // Pause in place for `duration` seconds (tag initialization phases).
  void request_halt(double duration);
  bool halted() const { return t_ < halt_until_; }

  std::vector<RadarFrame> synth_radar_frames(const std::vector<RadarSensorConfig>& sensors);
  std::vector<AoaReading> synth_aoa_readings(const AnchorRingConfig& ring);

 private:
  double gauss(double sigma);

  WorldModel world_;
  TrajectoryScript script_;
  NoiseConfig noise_;
  double dt_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};

  double t_ = 0.0;
  Pose2D true_pose_;
  Pose2D odom_pose_;
  size_t wp_index_ = 0;
  double halt_until_ = -1.0;
  double wp_halt_until_ = -1.0;
  double last_v_trans_ = 0.0;
  double last_v_rot_ = 0.0;
  bool finished_ = false;
};

}  // namespace uwbslam
