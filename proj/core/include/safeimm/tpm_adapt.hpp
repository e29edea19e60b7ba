#pragma once

#include <deque>
#include <span>

#include <Eigen/Core>

#include "safeimm/models.hpp"

namespace safeimm {

/// Online transition-matrix corrections.
struct TpmConfig {
  Eigen::MatrixXd pi_base = default_pi_base();
  double alpha_max = 0.7;
  double g_glr = 0.10;
  double g_ent = 0.50;
  double winner_bias = 0.10;
  double ca_boost = 0.15;
  double cv_boost = 0.05;
  /// Largest permitted off-diagonal transition probability.
  double cap = 0.5;
  /// Mass the polarized target puts on the winner's column in every row;
  /// the rest is spread evenly. The off-diagonal cap is applied afterwards.
  double polar_mass = 1.0;
  /// GLR history length, in steps.
  int window = 5;
  bool enabled = true;

  static Eigen::MatrixXd default_pi_base();
};

/// Smallest entry any adapted TPM may contain.
inline constexpr double kTpmFloor = 1e-6;

/// Rolling evidence used by the GLR statistic and the winner-streak bias.
struct AdaptState {
  std::deque<Eigen::VectorXd> loglik_history;
  std::deque<int> winner_history;

  /// Appends one step and trims both buffers to `window`.
  void push(const Eigen::VectorXd& logliks, int winner, int window);
  /// Length of the run of identical winners at the tail of the history.
  [[nodiscard]] int winner_streak() const;
};

/// Throws std::invalid_argument on a malformed config.
void validate(const TpmConfig& cfg);

/// Windowed sum over steps of (best loglik - incumbent loglik), where the
/// incumbent is the most recent winner. Zero when the incumbent fits best
/// throughout. Empty history yields 0.
double glr_statistic(const AdaptState& state);

/// Shannon entropy of `w` normalized by log(M); 0 log 0 := 0.
double weight_entropy(const Eigen::VectorXd& w);

/// Blend weight min(alpha_max, g_glr * glr + g_ent * entropy).
double blend_alpha(const TpmConfig& cfg, double glr, double entropy);

/// Adapted TPM for the next step. Row-stochastic; entries in [kTpmFloor, 1].
/// `models` locates the CV and CA columns for the maneuver boosts.
Eigen::MatrixXd adapt_tpm(const TpmConfig& cfg, const AdaptState& state,
                          const Eigen::VectorXd& w, std::span<const MotionModel> models);

}  // namespace safeimm
