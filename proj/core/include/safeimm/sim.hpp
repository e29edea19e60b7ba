#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace safeimm {

/// A maneuver active on [t_start, t_end). Outside every maneuver a target
/// flies at constant velocity.
struct Maneuver {
  enum class Kind {
    /// Acceleration along the current heading, m/s^2.
    Longitudinal,
    /// Coordinated turn at constant speed; positive turns left, m/s^2.
    Lateral,
  };
  Kind kind = Kind::Longitudinal;
  double t_start = 0.0;
  double t_end = 0.0;
  double accel = 0.0;
};

struct TargetSpec {
  std::string name;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  std::vector<Maneuver> maneuvers;
};

struct NoiseProfile {
  /// Position measurement noise per axis, m.
  double sigma_pos = 2.0;
  /// Velocity jitter injected into truth propagation per step, m/s.
  double sigma_vel = 0.01;
};

struct ScenarioConfig {
  double dt = 0.1;
  double duration = 30.0;
  std::vector<TargetSpec> targets = default_targets();
  NoiseProfile noise;
  /// Expected false detections per step.
  double clutter_rate = 0.0;
  bool jamming = false;
  /// Fraction of jammed detections drawn with inflated noise.
  double jam_fraction = 0.05;
  double jam_scale = 10.0;
  double detection_prob = 1.0;
  /// Clutter region: truth bounding box grown by this margin, m.
  double clutter_margin = 20.0;
  std::uint64_t seed = 1;

  [[nodiscard]] int steps() const;

  static std::vector<TargetSpec> default_targets();
};

/// Throws std::invalid_argument on a malformed scenario.
void validate(const ScenarioConfig& cfg);

/// Kinematic state [p v a] of one target at one step.
struct TruthState {
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
};

/// One target's states at steps 0..steps()-1.
struct TruthTrajectory {
  int target_id = 0;
  std::vector<TruthState> states;
};

struct Detection {
  Eigen::Vector3d z = Eigen::Vector3d::Zero();
  /// Originating target, or -1 for clutter.
  int target_id = -1;
};

struct Frame {
  int step = 0;
  double time = 0.0;
  std::vector<Detection> detections;
};

struct MeasurementSet {
  std::vector<Frame> frames;
  /// Truth as seen by the sensor: the nominal trajectory plus the
  /// accumulated velocity jitter. Metrics compare against this.
  std::vector<TruthTrajectory> realized;
};

/// Noise-free nominal trajectories; deterministic in `cfg`.
std::vector<TruthTrajectory> generate_truth(const ScenarioConfig& cfg);

/// Seeded detections for every frame.
MeasurementSet generate_measurements(const std::vector<TruthTrajectory>& truth,
                                     const ScenarioConfig& cfg);

/// Builds the named benchmark profile on top of the default scenario:
/// "profile1" (2.0 m, 0.01 m/s), "profile2" (0.01 m, 2.0 m/s),
/// "high_noise" (0.30 m, 8.0 m/s), "t2_stress" (profile1, T2 only, sharper turn).
/// Throws std::invalid_argument for an unknown name.
ScenarioConfig named_scenario(const std::string& name);

}  // namespace safeimm
