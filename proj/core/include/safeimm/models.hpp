#pragma once

#include <string_view>

#include "safeimm/types.hpp"

namespace safeimm {

enum class ModelKind { CV, CA };

std::string_view to_string(ModelKind kind);

/// Linear kinematic motion model.
///
/// State layout is grouped by derivative order, not interleaved per axis:
///   CV: [px py pz | vx vy vz]
///   CA: [px py pz | vx vy vz | ax ay az]
/// so the position block always sits at indices 0..2 and mappings between
/// models are leading-block slices.
///
/// `q` is the white-noise intensity of the highest modeled derivative:
/// acceleration for CV in (m/s^2)^2/Hz, jerk for CA in (m/s^3)^2/Hz.
struct MotionModel {
  ModelKind kind = ModelKind::CV;
  double q = 0.5;

  static MotionModel cv(double q = 0.5) { return {ModelKind::CV, q}; }
  static MotionModel ca(double q = 0.2) { return {ModelKind::CA, q}; }

  [[nodiscard]] int state_dim() const { return kind == ModelKind::CV ? 6 : 9; }
  [[nodiscard]] int order() const { return kind == ModelKind::CV ? 2 : 3; }
};

/// Default variance given to acceleration states that appear when a CV
/// estimate is lifted into CA space, (m/s^2)^2.
inline constexpr double kDefaultPadVariance = 25.0;

/// F(dt). Throws std::invalid_argument for dt <= 0.
StateMatrix transition_matrix(const MotionModel& model, double dt);

/// Discrete white-noise Q(dt), symmetric PSD. Throws std::invalid_argument for dt <= 0.
StateMatrix process_noise(const MotionModel& model, double dt);

/// Position selector H = [I3 | 0].
MeasStateMatrix measurement_matrix(const MotionModel& model);

/// Linear map T_{from->to} between model state spaces (truncate or zero-pad).
StateMatrix mapping_matrix(const MotionModel& from, const MotionModel& to);

/// Maps an estimate into another model's state space.
///
/// CA->CV drops the acceleration block. CV->CA zero-pads it and puts
/// `pad_variance` on the new diagonal entries so the covariance stays
/// nonsingular. Same-kind mapping returns the estimate unchanged.
GaussianEstimate map_state(const MotionModel& from, const MotionModel& to,
                           const GaussianEstimate& est,
                           double pad_variance = kDefaultPadVariance);

}  // namespace safeimm
