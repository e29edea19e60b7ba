#include "safeimm/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace safeimm {

std::string to_string(TrackerKind kind) {
  switch (kind) {
    case TrackerKind::SafeImm:
      return "safe_imm";
    case TrackerKind::ImmMixtureOnly:
      return "imm_mixture_only";
    case TrackerKind::KfCv:
      return "kf_cv";
    case TrackerKind::KfCa:
      return "kf_ca";
  }
  return "?";
}

std::string to_string(Likelihood lik) {
  return lik == Likelihood::StudentT ? "student_t" : "gaussian";
}

TrackerConfig make_tracker_config(const RunConfig& cfg) {
  TrackerConfig t = cfg.gnn;
  switch (cfg.tracker) {
    case TrackerKind::SafeImm:
    case TrackerKind::ImmMixtureOnly:
      t.models = {MotionModel::cv(cfg.q_cv), MotionModel::ca(cfg.q_ca)};
      break;
    case TrackerKind::KfCv:
      t.models = {MotionModel::cv(cfg.q_cv)};
      break;
    case TrackerKind::KfCa:
      t.models = {MotionModel::ca(cfg.q_ca)};
      break;
  }
  t.imm.likelihood = cfg.likelihood;
  t.imm.nu = cfg.scenario.jamming ? cfg.nu_jam : cfg.nu;
  t.imm.gate = cfg.gate;
  if (cfg.tracker == TrackerKind::ImmMixtureOnly) t.imm.gate.enabled = false;
  t.imm.tpm = cfg.tpm;
  t.imm.pad_variance = cfg.gnn.imm.pad_variance;
  t.imm.prob_floor = cfg.gnn.imm.prob_floor;
  return t;
}

Eigen::Matrix3d filter_measurement_cov(const RunConfig& cfg) {
  const double s = cfg.meas_sigma.value_or(cfg.scenario.noise.sigma_pos);
  return s * s * Eigen::Matrix3d::Identity();
}

RunResult run_once(const RunConfig& cfg, std::uint64_t seed, RunTrace* trace) {
  ScenarioConfig sc = cfg.scenario;
  sc.seed = seed;
  const auto truth = generate_truth(sc);
  const auto meas = generate_measurements(truth, sc);
  const TrackerConfig tcfg = make_tracker_config(cfg);
  validate(tcfg);
  const Eigen::Matrix3d r = filter_measurement_cov(cfg);
  const double eps = tcfg.imm.gate.epsilon;

  const std::size_t nt = truth.size();
  const std::size_t nf = meas.frames.size();
  std::vector<std::vector<Eigen::Vector3d>> tpos(nt), tvel(nt);
  std::vector<std::vector<std::optional<Eigen::Vector3d>>> epos(nt), evel(nt);
  std::vector<std::optional<std::uint64_t>> last_id(nt);

  RunResult res;
  res.seed = seed;
  res.frames = static_cast<int>(nf);
  res.targets.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    res.targets[t].name = t < sc.targets.size() ? sc.targets[t].name : "T" + std::to_string(t + 1);
  }
  std::vector<OspaResult> target_ospa_sum(nt);
  OspaResult ospa_sum;

  TrackerState state;
  std::vector<Eigen::Vector3d> dets;
  std::vector<Eigen::Vector3d> xs, ys;
  for (std::size_t k = 0; k < nf; ++k) {
    const Frame& frame = meas.frames[k];
    dets.clear();
    for (const auto& d : frame.detections) dets.push_back(d.z);
    const TrackerStepResult step = tracker_step(state, dets, sc.dt, r, tcfg);

    xs.clear();
    ys.clear();
    for (std::size_t t = 0; t < nt; ++t) xs.push_back(meas.realized[t].states[k].pos);
    for (const auto& o : step.confirmed) ys.push_back(o.estimate.mean.head<3>());
    const OspaResult o = ospa(xs, ys, cfg.ospa_c, cfg.ospa_p);
    ospa_sum.total += o.total;
    ospa_sum.loc += o.loc;
    ospa_sum.card += o.card;

    std::vector<int> matched_target(step.confirmed.size(), -1);
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& real = meas.realized[t].states[k];
      tpos[t].push_back(real.pos);
      tvel[t].push_back(real.vel);
      int best = -1;
      double best_d = cfg.match_radius;
      for (std::size_t j = 0; j < step.confirmed.size(); ++j) {
        const double d = (step.confirmed[j].estimate.mean.head<3>() - real.pos).norm();
        if (d <= best_d) {
          best_d = d;
          best = static_cast<int>(j);
        }
      }
      if (best >= 0) {
        const auto& out = step.confirmed[static_cast<std::size_t>(best)];
        epos[t].emplace_back(out.estimate.mean.head<3>());
        evel[t].emplace_back(out.estimate.mean.segment<3>(3));
        if (last_id[t] && *last_id[t] != out.track_id) ++res.targets[t].id_switches;
        last_id[t] = out.track_id;
        matched_target[static_cast<std::size_t>(best)] = static_cast<int>(t);
        const Eigen::Vector3d y = out.estimate.mean.head<3>();
        const OspaResult po = ospa(std::span(&real.pos, 1), std::span(&y, 1), cfg.ospa_c, cfg.ospa_p);
        target_ospa_sum[t].total += po.total;
        target_ospa_sum[t].loc += po.loc;
        target_ospa_sum[t].card += po.card;
      } else {
        epos[t].emplace_back(std::nullopt);
        evel[t].emplace_back(std::nullopt);
        target_ospa_sum[t].total += cfg.ospa_c;
        target_ospa_sum[t].card += cfg.ospa_c;
      }
    }

    for (std::size_t j = 0; j < step.confirmed.size(); ++j) {
      const auto& out = step.confirmed[j];
      const auto& dec = out.decision;
      auto& a = res.audit;
      ++a.steps;
      a.max_actual_drift = std::max(a.max_actual_drift, dec.actual_drift);
      a.max_bound = std::max(a.max_bound, dec.bound);
      if (dec.fired) {
        ++a.fired;
        if (dec.actual_drift <= eps) ++a.compliant;
        a.max_fired_drift = std::max(a.max_fired_drift, dec.actual_drift);
        a.min_fired_margin = std::min(a.min_fired_margin, dec.margin);
      }
      if (dec.actual_drift > dec.bound * (1.0 + 1e-9) + 1e-12) ++a.bound_violations;
      if (!out.estimate.mean.allFinite() || !is_psd(out.estimate.cov)) res.numerics_ok = false;

      if (trace != nullptr) {
        TraceRow row;
        row.step = frame.step;
        row.time = frame.time;
        row.track_id = out.track_id;
        row.target = matched_target[j];
        row.state.head(out.estimate.dim()) = out.estimate.mean;
        for (const auto& tr : state.tracks) {
          if (tr.id == out.track_id) row.weights = tr.bank.weights;
        }
        row.decision = dec;
        row.updated = out.updated;
        trace->rows.push_back(std::move(row));
      }
    }
    res.final_confirmed = static_cast<int>(step.confirmed.size());
  }

  const double inv = nf > 0 ? 1.0 / static_cast<double>(nf) : 0.0;
  res.ospa = {ospa_sum.total * inv, ospa_sum.loc * inv, ospa_sum.card * inv};
  for (std::size_t t = 0; t < nt; ++t) {
    auto& tm = res.targets[t];
    tm.rmse_x = rmse(tpos[t], epos[t], 0);
    tm.rmse_y = rmse(tpos[t], epos[t], 1);
    tm.vel_rmse_x = rmse(tvel[t], evel[t], 0);
    tm.vel_rmse_y = rmse(tvel[t], evel[t], 1);
    tm.ospa = {target_ospa_sum[t].total * inv, target_ospa_sum[t].loc * inv,
               target_ospa_sum[t].card * inv};
  }
  return res;
}

std::vector<RunResult> run_campaign(const RunConfig& cfg) {
  const std::size_t n = cfg.seeds.size();
  std::vector<RunResult> out(n);
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = run_once(cfg, cfg.seeds[i]);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

CampaignSummary summarize(const std::vector<RunResult>& runs) {
  CampaignSummary s;
  s.runs = static_cast<int>(runs.size());
  if (runs.empty()) return s;
  const std::size_t nt = runs.front().targets.size();
  s.rmse_x.assign(nt, 0.0);
  s.rmse_y.assign(nt, 0.0);
  s.audit.min_fired_margin = 1.0;
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < nt && t < r.targets.size(); ++t) {
      s.rmse_x[t] += r.targets[t].rmse_x.value;
      s.rmse_y[t] += r.targets[t].rmse_y.value;
    }
    s.ospa.total += r.ospa.total;
    s.ospa.loc += r.ospa.loc;
    s.ospa.card += r.ospa.card;
    auto& a = s.audit;
    a.steps += r.audit.steps;
    a.fired += r.audit.fired;
    a.compliant += r.audit.compliant;
    a.bound_violations += r.audit.bound_violations;
    a.max_actual_drift = std::max(a.max_actual_drift, r.audit.max_actual_drift);
    a.max_fired_drift = std::max(a.max_fired_drift, r.audit.max_fired_drift);
    a.max_bound = std::max(a.max_bound, r.audit.max_bound);
    a.min_fired_margin = std::min(a.min_fired_margin, r.audit.min_fired_margin);
  }
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (std::size_t t = 0; t < nt; ++t) {
    s.rmse_x[t] *= inv;
    s.rmse_y[t] *= inv;
  }
  s.ospa.total *= inv;
  s.ospa.loc *= inv;
  s.ospa.card *= inv;
  return s;
}

std::vector<AblationCell> run_ablation(const RunConfig& cfg) {
  std::vector<AblationCell> cells;
  for (bool gate : {true, false}) {
    for (Likelihood lik : {Likelihood::Gaussian, Likelihood::StudentT}) {
      for (bool adaptive : {false, true}) {
        AblationCell cell;
        cell.gate = gate;
        cell.likelihood = lik;
        cell.adaptive_tpm = adaptive;
        RunConfig c = cfg;
        c.tracker = gate ? TrackerKind::SafeImm : TrackerKind::ImmMixtureOnly;
        c.likelihood = lik;
        c.tpm.enabled = adaptive;
        cell.runs = run_campaign(c);
        cell.summary = summarize(cell.runs);
        cell.max_excursion = cell.summary.audit.max_actual_drift;
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

}  // namespace safeimm
