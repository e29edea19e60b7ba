#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <nlohmann/json.hpp>

#include "safeimm/bench.hpp"
#include "safeimm/config.hpp"
#include "safeimm/runner.hpp"
#include "safeimm/sim.hpp"

namespace safeimm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMetricsSchema = "safeimm.metrics/1";
constexpr const char* kAblationSchema = "safeimm.ablation/1";
constexpr const char* kBenchSchema = "safeimm.bench/1";

RunConfig load(const CommonArgs& args) {
  RunConfig cfg = load_config(args.config, args.overrides);
  if (args.seed) {
    cfg.seeds = {*args.seed};
    cfg.scenario.seed = *args.seed;
  }
  if (const char* env = std::getenv("SAFEIMM_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    cfg.output_dir = env;
  }
  return cfg;
}

fs::path prepare_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setprecision(10);
  return out;
}

json ospa_json(const OspaResult& o) {
  return {{"mean", o.total}, {"loc", o.loc}, {"card", o.card}};
}

json audit_json(const GateAudit& a) {
  return {{"steps", a.steps},
          {"fired", a.fired},
          {"compliant", a.compliant},
          {"compliance_pct", 100.0 * a.compliance()},
          {"bound_violations", a.bound_violations},
          {"max_actual_drift", a.max_actual_drift},
          {"max_fired_drift", a.max_fired_drift},
          {"max_bound", a.max_bound},
          {"min_fired_margin", a.min_fired_margin}};
}

json run_json(const RunResult& r) {
  json targets = json::array();
  for (const auto& t : r.targets) {
    targets.push_back({{"name", t.name},
                       {"rmse_x", t.rmse_x.value},
                       {"rmse_y", t.rmse_y.value},
                       {"vel_rmse_x", t.vel_rmse_x.value},
                       {"vel_rmse_y", t.vel_rmse_y.value},
                       {"matched_frames", t.rmse_x.matched},
                       {"gap_frames", t.rmse_x.gaps},
                       {"id_switches", t.id_switches},
                       {"ospa", ospa_json(t.ospa)}});
  }
  return {{"seed", r.seed},
          {"frames", r.frames},
          {"targets", targets},
          {"ospa", ospa_json(r.ospa)},
          {"gate", audit_json(r.audit)},
          {"numerics_ok", r.numerics_ok}};
}

json config_json(const RunConfig& cfg) {
  return {{"tracker", to_string(cfg.tracker)},
          {"likelihood", to_string(cfg.likelihood)},
          {"nu", cfg.nu},
          {"tpm", cfg.tpm.enabled ? "adaptive" : "fixed"},
          {"epsilon", cfg.gate.epsilon},
          {"margin", cfg.gate.margin},
          {"streak_len", cfg.gate.streak_len},
          {"sigma_pos", cfg.scenario.noise.sigma_pos},
          {"sigma_vel", cfg.scenario.noise.sigma_vel},
          {"dt", cfg.scenario.dt},
          {"duration", cfg.scenario.duration},
          {"ospa_c", cfg.ospa_c},
          {"ospa_p", cfg.ospa_p}};
}

void write_trace(const fs::path& dir, const RunTrace& trace) {
  auto tracks = open_out(dir / "tracks.csv");
  tracks << "step,time,track_id,target,px,py,pz,vx,vy,vz,ax,ay,az,updated\n";
  auto gate = open_out(dir / "gate_events.csv");
  gate << "step,time,track_id,target,winner,fired,bound,actual_drift,epsilon,winner_prob,"
          "margin,loglik_margin,streak,w0,w1\n";
  for (const auto& row : trace.rows) {
    tracks << row.step << ',' << row.time << ',' << row.track_id << ',' << row.target;
    for (int i = 0; i < 9; ++i) tracks << ',' << row.state(i);
    tracks << ',' << (row.updated ? 1 : 0) << '\n';

    const auto& d = row.decision;
    gate << row.step << ',' << row.time << ',' << row.track_id << ',' << row.target << ','
         << d.winner_idx << ',' << (d.fired ? 1 : 0) << ',' << d.bound << ',' << d.actual_drift
         << ',' << d.epsilon << ',' << d.winner_prob << ',' << d.margin << ',' << d.loglik_margin
         << ',' << d.streak_len;
    for (Eigen::Index i = 0; i < 2; ++i) {
      gate << ',' << (i < row.weights.size() ? row.weights(i) : 0.0);
    }
    gate << '\n';
  }
}

}  // namespace

int cmd_simulate(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  ScenarioConfig sc = cfg.scenario;
  sc.seed = cfg.seeds.front();
  const auto truth = generate_truth(sc);
  const auto meas = generate_measurements(truth, sc);
  const fs::path dir = prepare_dir(cfg);

  auto t = open_out(dir / "truth.csv");
  t << "step,time,target_id,px,py,pz,vx,vy,vz\n";
  long truth_rows = 0;
  for (std::size_t k = 0; k < meas.frames.size(); ++k) {
    for (const auto& traj : meas.realized) {
      const auto& s = traj.states[k];
      t << k << ',' << meas.frames[k].time << ',' << traj.target_id << ',' << s.pos.x() << ','
        << s.pos.y() << ',' << s.pos.z() << ',' << s.vel.x() << ',' << s.vel.y() << ','
        << s.vel.z() << '\n';
      ++truth_rows;
    }
  }

  auto m = open_out(dir / "measurements.csv");
  m << "step,time,target_id,px,py,pz\n";
  long det_rows = 0;
  for (const auto& f : meas.frames) {
    for (const auto& d : f.detections) {
      m << f.step << ',' << f.time << ',';
      if (d.target_id < 0) m << "clutter";
      else m << d.target_id;
      m << ',' << d.z.x() << ',' << d.z.y() << ',' << d.z.z() << '\n';
      ++det_rows;
    }
  }
  std::cout << "simulate: seed=" << sc.seed << " steps=" << sc.steps()
            << " targets=" << truth.size() << " truth_rows=" << truth_rows
            << " detections=" << det_rows << " dir=" << dir.string() << '\n';
  return 0;
}

int cmd_track(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  const fs::path dir = prepare_dir(cfg);

  RunTrace trace;
  std::vector<RunResult> runs;
  runs.push_back(run_once(cfg, cfg.seeds.front(), &trace));
  if (cfg.seeds.size() > 1) {
    RunConfig rest = cfg;
    rest.seeds.erase(rest.seeds.begin());
    auto more = run_campaign(rest);
    runs.insert(runs.end(), more.begin(), more.end());
  }
  write_trace(dir, trace);

  const CampaignSummary s = summarize(runs);
  json runs_json = json::array();
  for (const auto& r : runs) runs_json.push_back(run_json(r));
  json per_target = json::array();
  for (std::size_t t = 0; t < s.rmse_x.size(); ++t) {
    per_target.push_back({{"name", runs.front().targets[t].name},
                          {"rmse_x", s.rmse_x[t]},
                          {"rmse_y", s.rmse_y[t]}});
  }
  json doc = {{"schema", kMetricsSchema},
              {"config", config_json(cfg)},
              {"runs", runs_json},
              {"summary",
               {{"runs", s.runs},
                {"targets", per_target},
                {"ospa", ospa_json(s.ospa)},
                {"gate", audit_json(s.audit)}}}};
  open_out(dir / "metrics.json") << doc.dump(2) << '\n';

  std::cout << std::fixed << std::setprecision(3);
  std::cout << "track: " << to_string(cfg.tracker) << " seeds=" << s.runs << '\n';
  for (std::size_t t = 0; t < s.rmse_x.size(); ++t) {
    std::cout << "  " << runs.front().targets[t].name << " rmse_xy=[" << s.rmse_x[t] << ", "
              << s.rmse_y[t] << "]\n";
  }
  std::cout << "  ospa mean|loc|card = " << s.ospa.total << " | " << s.ospa.loc << " | "
            << s.ospa.card << '\n';
  std::cout << "  gate: fired " << s.audit.fired << "/" << s.audit.steps
            << " compliance=" << 100.0 * s.audit.compliance() << "%\n";
  return 0;
}

int cmd_ablate(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  const fs::path dir = prepare_dir(cfg);
  const auto cells = run_ablation(cfg);

  auto table = open_out(dir / "ablation.csv");
  table << "gate,likelihood,tpm,runs,ospa_mean,ospa_loc,ospa_card";
  const std::size_t nt = cells.front().summary.rmse_x.size();
  for (std::size_t t = 0; t < nt; ++t) table << ",rmse_x_T" << t + 1 << ",rmse_y_T" << t + 1;
  table << ",max_excursion,fired,compliance_pct\n";

  auto paired = open_out(dir / "ablation_runs.csv");
  paired << "gate,likelihood,tpm,seed,ospa_mean,max_excursion\n";

  json doc = {{"schema", kAblationSchema}, {"config", config_json(cfg)}, {"cells", json::array()}};
  std::cout << std::fixed << std::setprecision(3);
  std::cout << "gate likelihood  tpm       ospa   max_excursion  compliance\n";
  for (const auto& c : cells) {
    const char* gate = c.gate ? "on" : "off";
    const char* tpm = c.adaptive_tpm ? "adaptive" : "fixed";
    const auto lik = to_string(c.likelihood);
    table << gate << ',' << lik << ',' << tpm << ',' << c.summary.runs << ','
          << c.summary.ospa.total << ',' << c.summary.ospa.loc << ',' << c.summary.ospa.card;
    for (std::size_t t = 0; t < nt; ++t) {
      table << ',' << c.summary.rmse_x[t] << ',' << c.summary.rmse_y[t];
    }
    table << ',' << c.max_excursion << ',' << c.summary.audit.fired << ','
          << 100.0 * c.summary.audit.compliance() << '\n';
    for (const auto& r : c.runs) {
      paired << gate << ',' << lik << ',' << tpm << ',' << r.seed << ',' << r.ospa.total << ','
             << r.audit.max_actual_drift << '\n';
    }
    doc["cells"].push_back({{"gate", c.gate},
                            {"likelihood", lik},
                            {"tpm", tpm},
                            {"ospa", ospa_json(c.summary.ospa)},
                            {"max_excursion", c.max_excursion},
                            {"gate_audit", audit_json(c.summary.audit)}});
    std::cout << std::left << std::setw(5) << gate << std::setw(11) << lik << std::setw(10)
              << tpm << std::right << std::setw(6) << c.summary.ospa.total << std::setw(16)
              << c.max_excursion << std::setw(11) << 100.0 * c.summary.audit.compliance()
              << "%\n";
  }
  open_out(dir / "ablation.json") << doc.dump(2) << '\n';
  return 0;
}

int cmd_bench(const CommonArgs& args) {
  const RunConfig cfg = load(args);
  const fs::path dir = prepare_dir(cfg);
  const BenchReport rep = measure_throughput(cfg);

  auto lat = [](const LatencyStats& s) {
    return json{{"per_second", s.per_second},
                {"p50_us", s.p50_us},
                {"p99_us", s.p99_us},
                {"samples", s.samples}};
  };
  json scaling = json::array();
  for (const auto& p : rep.scaling) {
    scaling.push_back({{"tracks", p.tracks},
                       {"frames_per_second", p.frames_per_second},
                       {"track_updates_per_second", p.track_updates_per_second}});
  }
  constexpr double kFrameRateHz = 10.0;
  json doc = {{"schema", kBenchSchema},
              {"imm_step", lat(rep.imm_step)},
              {"tracker_frame", lat(rep.tracker_frame)},
              {"scaling", scaling},
              {"realtime_margin", rep.tracker_frame.per_second / kFrameRateHz}};
  open_out(dir / "bench.json") << doc.dump(2) << '\n';

  std::cout << std::fixed << std::setprecision(1);
  std::cout << "imm_step:      " << rep.imm_step.per_second << " steps/s  p50 "
            << rep.imm_step.p50_us << " us  p99 " << rep.imm_step.p99_us << " us\n";
  std::cout << "tracker frame: " << rep.tracker_frame.per_second << " frames/s  p50 "
            << rep.tracker_frame.p50_us << " us  p99 " << rep.tracker_frame.p99_us << " us\n";
  for (const auto& p : rep.scaling) {
    std::cout << "  " << std::setw(4) << p.tracks << " tracks: " << p.frames_per_second
              << " frames/s (" << p.track_updates_per_second << " track-updates/s)\n";
  }
  return 0;
}

}  // namespace safeimm::cli
