#include "safeimm/tracker.hpp"

#include <algorithm>
#include <stdexcept>

namespace safeimm {

namespace {

Eigen::VectorXd initial_weights(const TrackerConfig& cfg) {
  const auto m = static_cast<Eigen::Index>(cfg.models.size());
  if (cfg.init_weights.size() == m) {
    return cfg.init_weights / cfg.init_weights.sum();
  }
  if (m == 2) {
    Eigen::VectorXd w(2);
    w << 0.9, 0.1;
    return w;
  }
  return Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
}

Eigen::MatrixXd initial_tpm(const TrackerConfig& cfg) {
  const auto m = static_cast<Eigen::Index>(cfg.models.size());
  if (cfg.imm.tpm.pi_base.rows() == m) {
    return cfg.imm.tpm.pi_base;
  }
  return Eigen::MatrixXd::Identity(m, m);
}

Track spawn_track(std::uint64_t id, const Eigen::Vector3d& z, const Eigen::Vector3d* prev,
                  double dt, const Eigen::Matrix3d& r, const TrackerConfig& cfg) {
  const MotionModel ca = MotionModel::ca();
  GaussianEstimate init;
  init.mean = StateVector::Zero(9);
  init.cov = StateMatrix::Zero(9, 9);
  init.mean.head<3>() = z;
  init.cov.topLeftCorner<3, 3>() = r;
  if (prev != nullptr) {
    init.mean.segment<3>(3) = (z - *prev) / dt;
    init.cov.block<3, 3>(3, 3) = 2.0 * r / (dt * dt);
    init.cov.block<3, 3>(0, 3) = r / dt;
    init.cov.block<3, 3>(3, 0) = r / dt;
  } else {
    init.cov.block<3, 3>(3, 3) = cfg.init_velocity_variance * Eigen::Matrix3d::Identity();
  }
  init.cov.block<3, 3>(6, 6) = cfg.imm.pad_variance * Eigen::Matrix3d::Identity();

  // Seed every model from the CA-space estimate.
  Track t;
  t.id = id;
  t.bank.models = cfg.models;
  for (const auto& m : cfg.models) {
    t.bank.estimates.push_back(map_state(ca, m, init, cfg.imm.pad_variance));
  }
  t.bank.weights = initial_weights(cfg);
  t.bank.tpm = initial_tpm(cfg);
  t.status = TrackStatus::Tentative;
  t.history.push_back(true);
  SafeOutput out = safe_output(t.bank, cfg.imm.gate, cfg.imm.pad_variance);
  t.output = out.estimate;
  t.decision = out.decision;
  return t;
}

// Innovation of a zero measurement against the gating estimate: v = -H mu and S.
Innovation gating_innovation(const ModelBank& bank, const Eigen::Matrix3d& r, GateSource source,
                             double pad_variance) {
  const MeasVector zero = MeasVector::Zero();
  Innovation inn;
  if (source == GateSource::Mixture) {
    const int c = bank.canonical_index();
    const GaussianEstimate mix = mixture_moments(bank, c, pad_variance);
    inn = innovation(mix, bank.models[static_cast<std::size_t>(c)], zero, r);
  } else {
    const int w = bank.winner_index();
    inn = innovation(bank.estimates[static_cast<std::size_t>(w)],
                     bank.models[static_cast<std::size_t>(w)], zero, r);
  }
  return inn;
}

}  // namespace

void validate(const TrackerConfig& cfg) {
  if (cfg.models.empty()) throw std::invalid_argument("tracker needs at least one model");
  for (const auto& m : cfg.models) {
    if (!(m.q > 0.0)) throw std::invalid_argument("model process intensity must be positive");
  }
  if (!(cfg.assign_threshold > 0.0)) {
    throw std::invalid_argument("gnn.assign_threshold must be positive");
  }
  if (cfg.confirm_hits < 1 || cfg.confirm_window < cfg.confirm_hits) {
    throw std::invalid_argument("gnn confirmation needs 1 <= M <= N");
  }
  if (cfg.max_misses < 1) throw std::invalid_argument("gnn.max_misses must be at least 1");
  if (cfg.imm.tpm.pi_base.rows() == static_cast<Eigen::Index>(cfg.models.size())) {
    validate(cfg.imm.tpm);
  }
}

int Track::hits_in_window() const {
  return static_cast<int>(std::count(history.begin(), history.end(), true));
}

Eigen::MatrixXd cost_matrix(std::span<const Track> tracks,
                            std::span<const Eigen::Vector3d> detections,
                            const Eigen::Matrix3d& r, const TrackerConfig& cfg) {
  const auto nt = static_cast<Eigen::Index>(tracks.size());
  const auto nd = static_cast<Eigen::Index>(detections.size());
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(nt, nd, kForbidden);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const Innovation base = gating_innovation(tracks[static_cast<std::size_t>(t)].bank, r,
                                              cfg.gate_source, cfg.imm.pad_variance);
    // S is shared by every detection, so factor it once per track.
    const auto llt = factor_innovation(base.s);
    for (Eigen::Index d = 0; d < nd; ++d) {
      const MeasVector v = detections[static_cast<std::size_t>(d)] + base.v;
      double c = kForbidden;
      if (cfg.metric == CostMetric::Euclidean) {
        c = v.squaredNorm();
      } else if (llt) {
        c = llt->matrixL().solve(v).squaredNorm();
      }
      if (c < cfg.assign_threshold) cost(t, d) = c;
    }
  }
  return cost;
}

TrackerStepResult tracker_step(TrackerState& state, std::span<const Eigen::Vector3d> detections,
                               double dt, const Eigen::Matrix3d& r, const TrackerConfig& cfg) {
  TrackerStepResult res;

  for (auto& t : state.tracks) {
    t.bank = imm_predict(t.bank, dt, cfg.imm);
  }

  const Eigen::MatrixXd cost = cost_matrix(state.tracks, detections, r, cfg);
  res.assignment = solve_assignment(cost);

  for (const auto& [ti, di] : res.assignment.pairs) {
    Track& t = state.tracks[static_cast<std::size_t>(ti)];
    ImmStepResult step = imm_correct(t.bank, detections[static_cast<std::size_t>(di)], r, cfg.imm);
    t.bank = std::move(step.bank);
    t.output = std::move(step.output);
    t.decision = step.decision;
    t.history.push_back(true);
    t.misses_in_row = 0;
  }
  for (int ti : res.assignment.unassigned_rows) {
    Track& t = state.tracks[static_cast<std::size_t>(ti)];
    ImmStepResult step = imm_coast(t.bank, cfg.imm);
    t.bank = std::move(step.bank);
    t.output = std::move(step.output);
    t.decision = step.decision;
    t.history.push_back(false);
    ++t.misses_in_row;
  }

  for (auto& t : state.tracks) {
    ++t.age;
    while (static_cast<int>(t.history.size()) > cfg.confirm_window) t.history.pop_front();
    if (t.status == TrackStatus::Tentative && t.hits_in_window() >= cfg.confirm_hits) {
      t.status = TrackStatus::Confirmed;
    }
    const bool cannot_confirm = t.status == TrackStatus::Tentative &&
                                static_cast<int>(t.history.size()) >= cfg.confirm_window;
    if (t.misses_in_row >= cfg.max_misses || cannot_confirm) {
      t.status = TrackStatus::Deleted;
    }
  }

  // Spawn from unassigned detections, differencing against last frame's leftovers.
  std::vector<Eigen::Vector3d> leftovers;
  const double reach = cfg.init_max_speed * dt;
  for (int di : res.assignment.unassigned_cols) {
    const Eigen::Vector3d& z = detections[static_cast<std::size_t>(di)];
    const Eigen::Vector3d* prev = nullptr;
    double best = reach;
    for (const auto& p : state.pending) {
      const double d = (z - p).norm();
      if (d <= best) {
        best = d;
        prev = &p;
      }
    }
    state.tracks.push_back(spawn_track(state.next_id++, z, prev, dt, r, cfg));
    ++res.spawned;
    leftovers.push_back(z);
  }
  state.pending = std::move(leftovers);

  const auto before = state.tracks.size();
  std::erase_if(state.tracks, [](const Track& t) { return t.status == TrackStatus::Deleted; });
  res.deleted = static_cast<int>(before - state.tracks.size());

  for (const auto& t : state.tracks) {
    if (t.status != TrackStatus::Confirmed) continue;
    res.confirmed.push_back({t.id, t.output, t.decision, t.misses_in_row == 0});
  }
  return res;
}

}  // namespace safeimm
