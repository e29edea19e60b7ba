#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "safeimm/assignment.hpp"
#include "safeimm/imm.hpp"

namespace safeimm {

enum class TrackStatus { Tentative, Confirmed, Deleted };

enum class CostMetric { Mahalanobis, Euclidean };

/// Which predicted measurement and covariance a track is gated with.
enum class GateSource { TopWeightModel, Mixture };

struct TrackerConfig {
  std::vector<MotionModel> models = {MotionModel::cv(0.5), MotionModel::ca(0.2)};
  ImmConfig imm;
  /// Costs at or above this value are forbidden.
  double assign_threshold = 30.0;
  CostMetric metric = CostMetric::Mahalanobis;
  GateSource gate_source = GateSource::TopWeightModel;
  /// M-of-N confirmation.
  int confirm_hits = 2;
  int confirm_window = 5;
  /// Consecutive misses that delete a track.
  int max_misses = 5;
  /// New-track velocity variance when no velocity can be differenced, (m/s)^2.
  double init_velocity_variance = 100.0;
  /// Two detections closer than this speed * dt seed a differenced velocity.
  double init_max_speed = 60.0;
  /// Initial model probabilities for new tracks; empty means
  /// {0.9, 0.1} for two models and uniform otherwise.
  Eigen::VectorXd init_weights;
};

/// Throws std::invalid_argument on a malformed config.
void validate(const TrackerConfig& cfg);

struct Track {
  std::uint64_t id = 0;
  ModelBank bank;
  TrackStatus status = TrackStatus::Tentative;
  /// Most recent update last; true = associated.
  std::deque<bool> history;
  int age = 0;
  int misses_in_row = 0;
  GaussianEstimate output;
  GateDecision decision;

  [[nodiscard]] int hits_in_window() const;
};

struct TrackOutput {
  std::uint64_t track_id = 0;
  GaussianEstimate estimate;
  GateDecision decision;
  /// false when the track coasted this step.
  bool updated = false;
};

/// Mutable tracker state carried between frames.
struct TrackerState {
  std::vector<Track> tracks;
  std::uint64_t next_id = 1;
  /// Detections left unassociated on the previous frame.
  std::vector<Eigen::Vector3d> pending;
};

struct TrackerStepResult {
  std::vector<TrackOutput> confirmed;
  Assignment assignment;
  int spawned = 0;
  int deleted = 0;
};

/// Gating cost of each detection against each (already predicted) track.
/// Entries at or above the threshold are kForbidden.
Eigen::MatrixXd cost_matrix(std::span<const Track> tracks,
                            std::span<const Eigen::Vector3d> detections,
                            const Eigen::Matrix3d& r, const TrackerConfig& cfg);

/// One GNN frame: predict, gate, assign, update or coast, spawn, confirm,
/// delete. Returns the gated outputs of confirmed tracks.
TrackerStepResult tracker_step(TrackerState& state, std::span<const Eigen::Vector3d> detections,
                               double dt, const Eigen::Matrix3d& r, const TrackerConfig& cfg);

}  // namespace safeimm
