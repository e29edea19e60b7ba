#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "safeimm/kalman.hpp"
#include "safeimm/models.hpp"
#include "safeimm/tpm_adapt.hpp"
#include "safeimm/types.hpp"

namespace safeimm {

enum class Likelihood { Gaussian, StudentT };

/// Consecutive steps on which the gate condition held for the same winner.
struct WtaStreak {
  int consecutive_pass = 0;
  std::optional<int> last_winner;
};

struct GateConfig {
  /// Largest tolerated mixture-to-winner jump (Euclidean, full state).
  double epsilon = 0.5;
  /// Required w_winner - w_runner_up.
  double margin = 0.05;
  int streak_len = 2;
  /// false: always emit the mixture (plain IMM).
  bool enabled = true;
  /// Optional per-derivative-order scaling {pos, vel, acc} applied to the
  /// state before measuring drift. Identity by default.
  Eigen::Vector3d unit_scale = Eigen::Vector3d::Ones();
};

struct ImmConfig {
  Likelihood likelihood = Likelihood::Gaussian;
  /// Student-t degrees of freedom.
  double nu = 5.0;
  GateConfig gate;
  TpmConfig tpm;
  double pad_variance = kDefaultPadVariance;
  /// Posterior model-probability floor.
  double prob_floor = 1e-6;
};

/// IMM state for one target.
struct ModelBank {
  std::vector<MotionModel> models;
  std::vector<GaussianEstimate> estimates;
  Eigen::VectorXd weights;
  Eigen::MatrixXd tpm;
  WtaStreak streak;
  AdaptState adapt;

  [[nodiscard]] int size() const { return static_cast<int>(models.size()); }
  /// Index of the model with the largest state; mixture outputs live there.
  [[nodiscard]] int canonical_index() const;
  /// argmax of weights, ties to the lowest index.
  [[nodiscard]] int winner_index() const;
};

/// Builds a bank from one estimate expressed in `models[source]`'s space.
ModelBank make_bank(std::vector<MotionModel> models, const GaussianEstimate& init, int source,
                    Eigen::VectorXd weights, Eigen::MatrixXd tpm,
                    double pad_variance = kDefaultPadVariance);

/// Throws std::invalid_argument when the bank is structurally inconsistent.
void validate(const ModelBank& bank);

struct GateDecision {
  double bound = 0.0;
  double epsilon = 0.0;
  bool fired = false;
  int winner_idx = 0;
  double winner_prob = 1.0;
  double tail = 0.0;
  /// w_winner - w_runner_up.
  double margin = 1.0;
  bool margin_ok = true;
  int streak_len = 0;
  /// ||mu_mix - mu_winner|| in the winner's space, for the compliance audit.
  double actual_drift = 0.0;
  double dbar2 = 0.0;
  double trace_pbar = 0.0;
  /// Winner minus runner-up log-likelihood on the last update (NaN if none).
  double loglik_margin = 0.0;
};

struct MixResult {
  std::vector<GaussianEstimate> estimates;
  /// Set when some c-bar_j underflowed and model j was seeded from itself.
  bool degenerate = false;
};

struct PosteriorResult {
  Eigen::VectorXd weights;
  /// Set when no model carried mass and the priors were returned.
  bool fallback = false;
};

struct DriftBound {
  double bound = 0.0;
  StateMatrix pbar;
  double dbar2 = 0.0;
  int winner = 0;
  double winner_prob = 1.0;
  double tail = 0.0;
  /// Winner-space mixture mean and winner mean, scaled by unit_scale.
  StateVector mixture_mean;
  StateVector winner_mean;
  /// Jitter added to P-bar to obtain a Cholesky factor (0 if none).
  double jitter = 0.0;
};

struct SafeOutput {
  GaussianEstimate estimate;
  GateDecision decision;
  WtaStreak streak;
};

struct ImmStepResult {
  ModelBank bank;
  GaussianEstimate output;
  GateDecision decision;
  bool degenerate_mixing = false;
  bool posterior_fallback = false;
  /// Models whose update failed on a singular S.
  int failed_updates = 0;
};

/// c_{k|k-1} = Pi^T c_{k-1|k-1}
Eigen::VectorXd model_priors(const ModelBank& bank);

/// Mixed initial conditions (mu_0j, P_0j), each in model j's space.
MixResult mix_initial_conditions(const ModelBank& bank,
                                 double pad_variance = kDefaultPadVariance);

/// w_j proportional to prior_j * exp(loglik_j), in log space, then floored.
PosteriorResult posterior_weights(const Eigen::VectorXd& priors, const Eigen::VectorXd& logliks,
                                  double floor = 1e-6);

/// Moment-matched single Gaussian of the bank, in model `target`'s space.
GaussianEstimate mixture_moments(const ModelBank& bank, int target,
                                 double pad_variance = kDefaultPadVariance);

/// Covariance-aware bound B on ||mu_mix - mu_winner||.
DriftBound drift_bound(const ModelBank& bank, double pad_variance = kDefaultPadVariance,
                       const Eigen::Vector3d& unit_scale = Eigen::Vector3d::Ones());

/// Gated output: the winner's estimate when the bound, margin and streak
/// allow it, the mixture otherwise. Output lives in the canonical space.
SafeOutput safe_output(const ModelBank& bank, const GateConfig& cfg,
                       double pad_variance = kDefaultPadVariance);

/// Priors, mixing and per-model prediction. The returned bank carries the
/// predicted estimates and the priors as its weights.
ModelBank imm_predict(const ModelBank& bank, double dt, const ImmConfig& cfg,
                      bool* degenerate_mixing = nullptr);

/// Update, likelihoods, posterior, TPM adaptation and gated output for a
/// bank produced by imm_predict.
ImmStepResult imm_correct(const ModelBank& predicted, const MeasVector& z, const MeasMatrix& r,
                          const ImmConfig& cfg);

/// Gated output for a predicted bank with no measurement (coast).
ImmStepResult imm_coast(const ModelBank& predicted, const ImmConfig& cfg);

/// One full IMM cycle. Without `z` the step is predict-only.
ImmStepResult imm_step(const ModelBank& bank, const std::optional<MeasVector>& z,
                       const MeasMatrix& r, double dt, const ImmConfig& cfg);

}  // namespace safeimm
