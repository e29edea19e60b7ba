#include "safeimm/models.hpp"

#include <stdexcept>

namespace safeimm {

namespace {

void require_positive_dt(double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("dt must be positive");
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::CV:
      return "CV";
    case ModelKind::CA:
      return "CA";
  }
  return "?";
}

StateMatrix transition_matrix(const MotionModel& model, double dt) {
  require_positive_dt(dt);
  const int n = model.state_dim();
  StateMatrix f = StateMatrix::Identity(n, n);
  const auto i3 = Eigen::Matrix3d::Identity();
  f.block<3, 3>(0, 3) = dt * i3;
  if (model.kind == ModelKind::CA) {
    f.block<3, 3>(0, 6) = 0.5 * dt * dt * i3;
    f.block<3, 3>(3, 6) = dt * i3;
  }
  return f;
}

StateMatrix process_noise(const MotionModel& model, double dt) {
  require_positive_dt(dt);
  const int n = model.state_dim();
  const int order = model.order();

  // Per-axis block, indexed by derivative order.
  Eigen::Matrix3d blk = Eigen::Matrix3d::Zero();
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  if (model.kind == ModelKind::CV) {
    blk(0, 0) = dt3 / 3.0;
    blk(0, 1) = blk(1, 0) = dt2 / 2.0;
    blk(1, 1) = dt;
  } else {
    const double dt4 = dt3 * dt;
    const double dt5 = dt4 * dt;
    blk(0, 0) = dt5 / 20.0;
    blk(0, 1) = blk(1, 0) = dt4 / 8.0;
    blk(0, 2) = blk(2, 0) = dt3 / 6.0;
    blk(1, 1) = dt3 / 3.0;
    blk(1, 2) = blk(2, 1) = dt2 / 2.0;
    blk(2, 2) = dt;
  }
  blk *= model.q;

  StateMatrix q = StateMatrix::Zero(n, n);
  for (int r = 0; r < order; ++r) {
    for (int c = 0; c < order; ++c) {
      q.block<3, 3>(3 * r, 3 * c) = blk(r, c) * Eigen::Matrix3d::Identity();
    }
  }
  return q;
}

MeasStateMatrix measurement_matrix(const MotionModel& model) {
  MeasStateMatrix h = MeasStateMatrix::Zero(kMeasDim, model.state_dim());
  h.leftCols<3>().setIdentity();
  return h;
}

StateMatrix mapping_matrix(const MotionModel& from, const MotionModel& to) {
  const int m = to.state_dim();
  const int n = from.state_dim();
  StateMatrix t = StateMatrix::Zero(m, n);
  const int shared = std::min(m, n);
  t.topLeftCorner(shared, shared).setIdentity();
  return t;
}

GaussianEstimate map_state(const MotionModel& from, const MotionModel& to,
                           const GaussianEstimate& est, double pad_variance) {
  const int n = from.state_dim();
  const int m = to.state_dim();
  if (est.dim() != n) {
    throw std::invalid_argument("map_state: estimate dimension does not match source model");
  }
  if (n == m) {
    return est;
  }
  const int shared = std::min(m, n);
  GaussianEstimate out;
  out.mean = StateVector::Zero(m);
  out.cov = StateMatrix::Zero(m, m);
  out.mean.head(shared) = est.mean.head(shared);
  out.cov.topLeftCorner(shared, shared) = est.cov.topLeftCorner(shared, shared);
  for (int i = shared; i < m; ++i) {
    out.cov(i, i) = pad_variance;
  }
  return out;
}

}  // namespace safeimm
