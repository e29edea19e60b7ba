#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "safeimm/imm.hpp"
#include "safeimm/metrics.hpp"
#include "safeimm/sim.hpp"
#include "safeimm/tracker.hpp"

namespace safeimm {

enum class TrackerKind { SafeImm, ImmMixtureOnly, KfCv, KfCa };

std::string to_string(TrackerKind kind);
std::string to_string(Likelihood lik);

/// Everything one experiment needs. Defaults are the published settings
/// (profile 1 scenario, Student-t nu=5, adaptive TPM, eps=0.5, delta=0.05,
/// streak 2, GNN threshold 30, 2-of-5 confirmation).
struct RunConfig {
  ScenarioConfig scenario;
  TrackerKind tracker = TrackerKind::SafeImm;
  Likelihood likelihood = Likelihood::StudentT;
  double nu = 5.0;
  /// Student-t dof used while the scenario is jammed.
  double nu_jam = 2.0;
  double q_cv = 0.5;
  double q_ca = 0.2;
  /// Filter-side position noise; unset means the scenario's sigma_pos.
  std::optional<double> meas_sigma;
  GateConfig gate;
  TpmConfig tpm;
  TrackerConfig gnn;
  double ospa_c = 2.0;
  double ospa_p = 1.0;
  /// Truth-to-track matching radius for RMSE, m.
  double match_radius = 2.0;
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "out";
  /// Worker threads for campaigns; 0 picks hardware concurrency.
  int threads = 0;
};

/// Tracker configuration implied by a run config (models, likelihood, gate, TPM).
TrackerConfig make_tracker_config(const RunConfig& cfg);

/// Filter-side measurement covariance.
Eigen::Matrix3d filter_measurement_cov(const RunConfig& cfg);

struct TargetMetrics {
  std::string name;
  RmseResult rmse_x;
  RmseResult rmse_y;
  RmseResult vel_rmse_x;
  RmseResult vel_rmse_y;
  /// Changes of the matched track id after the first match.
  int id_switches = 0;
  /// Mean per-frame OSPA of {truth} against {matched estimate}.
  OspaResult ospa;
};

struct GateAudit {
  long steps = 0;
  long fired = 0;
  /// Fired steps with actual_drift <= epsilon.
  long compliant = 0;
  /// Fired steps with actual_drift > bound (should never happen).
  long bound_violations = 0;
  double max_actual_drift = 0.0;
  double max_fired_drift = 0.0;
  double max_bound = 0.0;
  double min_fired_margin = 1.0;

  [[nodiscard]] double compliance() const {
    return fired > 0 ? static_cast<double>(compliant) / static_cast<double>(fired) : 1.0;
  }
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<TargetMetrics> targets;
  OspaResult ospa;
  GateAudit audit;
  int frames = 0;
  int final_confirmed = 0;
  bool numerics_ok = true;
};

/// One row of the per-step trace (one confirmed track on one frame).
struct TraceRow {
  int step = 0;
  double time = 0.0;
  std::uint64_t track_id = 0;
  /// Truth target this track is matched to on this frame, or -1.
  int target = -1;
  Eigen::Matrix<double, 9, 1> state = Eigen::Matrix<double, 9, 1>::Zero();
  Eigen::VectorXd weights;
  GateDecision decision;
  bool updated = false;
};

struct RunTrace {
  std::vector<TraceRow> rows;
};

/// Simulates the scenario with `seed`, runs the tracker and scores it.
RunResult run_once(const RunConfig& cfg, std::uint64_t seed, RunTrace* trace = nullptr);

/// run_once for every seed in cfg.seeds, in parallel; results in seed order.
std::vector<RunResult> run_campaign(const RunConfig& cfg);

struct CampaignSummary {
  std::vector<double> rmse_x;
  std::vector<double> rmse_y;
  OspaResult ospa;
  GateAudit audit;
  int runs = 0;
};

/// Seed-averaged metrics and the pooled gate audit.
CampaignSummary summarize(const std::vector<RunResult>& runs);

struct AblationCell {
  bool gate = true;
  Likelihood likelihood = Likelihood::Gaussian;
  bool adaptive_tpm = false;
  std::vector<RunResult> runs;
  CampaignSummary summary;
  /// Largest mixture-to-winner drift seen over all seeds.
  double max_excursion = 0.0;
};

/// {gate on, off} x {gaussian, student_t} x {fixed, adaptive} over the
/// same seeds.
std::vector<AblationCell> run_ablation(const RunConfig& cfg);

}  // namespace safeimm
