#include "safeimm/tpm_adapt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safeimm {

Eigen::MatrixXd TpmConfig::default_pi_base() {
  Eigen::MatrixXd pi(2, 2);
  pi << 0.992, 0.008,
        0.015, 0.985;
  return pi;
}

void AdaptState::push(const Eigen::VectorXd& logliks, int winner, int window) {
  loglik_history.push_back(logliks);
  winner_history.push_back(winner);
  const auto cap = static_cast<std::size_t>(std::max(window, 1));
  while (loglik_history.size() > cap) loglik_history.pop_front();
  while (winner_history.size() > cap) winner_history.pop_front();
}

int AdaptState::winner_streak() const {
  if (winner_history.empty()) {
    return 0;
  }
  int n = 0;
  const int last = winner_history.back();
  for (auto it = winner_history.rbegin(); it != winner_history.rend() && *it == last; ++it) {
    ++n;
  }
  return n;
}

void validate(const TpmConfig& cfg) {
  const auto& pi = cfg.pi_base;
  if (pi.rows() != pi.cols() || pi.rows() == 0) {
    throw std::invalid_argument("tpm.pi_base must be square and non-empty");
  }
  if ((pi.array() < 0.0).any()) {
    throw std::invalid_argument("tpm.pi_base has negative entries");
  }
  for (Eigen::Index r = 0; r < pi.rows(); ++r) {
    if (std::abs(pi.row(r).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("tpm.pi_base rows must sum to 1");
    }
  }
  if (cfg.alpha_max < 0.0 || cfg.alpha_max > 1.0) {
    throw std::invalid_argument("tpm.alpha_max must lie in [0, 1]");
  }
  if (cfg.g_glr < 0.0 || cfg.g_ent < 0.0 || cfg.winner_bias < 0.0 || cfg.ca_boost < 0.0 ||
      cfg.cv_boost < 0.0) {
    throw std::invalid_argument("tpm gains must be non-negative");
  }
  if (!(cfg.polar_mass >= 0.0 && cfg.polar_mass <= 1.0)) {
    throw std::invalid_argument("tpm.polar_mass must lie in [0, 1]");
  }
  if (!(cfg.cap > 0.0 && cfg.cap < 1.0)) {
    throw std::invalid_argument("tpm.cap must lie in (0, 1)");
  }
  if (cfg.window < 1) {
    throw std::invalid_argument("tpm.window must be at least 1");
  }
}

double glr_statistic(const AdaptState& state) {
  if (state.loglik_history.empty() || state.winner_history.empty()) {
    return 0.0;
  }
  const int incumbent = state.winner_history.back();
  double glr = 0.0;
  for (const auto& ll : state.loglik_history) {
    if (incumbent < 0 || incumbent >= ll.size()) continue;
    const double best = ll.maxCoeff();
    const double inc = ll(incumbent);
    if (std::isfinite(best) && best > inc) {
      // A failed incumbent update (-inf) contributes a bounded penalty.
      glr += std::isfinite(inc) ? best - inc : 0.0;
    }
  }
  return glr;
}

double weight_entropy(const Eigen::VectorXd& w) {
  const auto m = w.size();
  if (m <= 1) {
    return 0.0;
  }
  double h = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (w(i) > 0.0) h -= w(i) * std::log(w(i));
  }
  return std::clamp(h / std::log(static_cast<double>(m)), 0.0, 1.0);
}

double blend_alpha(const TpmConfig& cfg, double glr, double entropy) {
  return std::clamp(cfg.g_glr * glr + cfg.g_ent * entropy, 0.0, cfg.alpha_max);
}

namespace {

int argmax_lowest(const Eigen::VectorXd& w) {
  int best = 0;
  for (Eigen::Index i = 1; i < w.size(); ++i) {
    if (w(i) > w(best)) best = static_cast<int>(i);
  }
  return best;
}

int find_kind(std::span<const MotionModel> models, ModelKind kind) {
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].kind == kind) return static_cast<int>(i);
  }
  return -1;
}

void normalize_row(Eigen::MatrixXd& pi, Eigen::Index r) {
  const double s = pi.row(r).sum();
  if (s > 0.0) pi.row(r) /= s;
}

}  // namespace

Eigen::MatrixXd adapt_tpm(const TpmConfig& cfg, const AdaptState& state,
                          const Eigen::VectorXd& w, std::span<const MotionModel> models) {
  if (!cfg.enabled) {
    return cfg.pi_base;
  }
  const Eigen::Index m = cfg.pi_base.rows();
  if (m <= 1) {
    return cfg.pi_base;
  }

  const double glr = glr_statistic(state);
  const double alpha = blend_alpha(cfg, glr, weight_entropy(w));
  const int winner = argmax_lowest(w);

  Eigen::MatrixXd pi = cfg.pi_base;
  if (alpha > 0.0) {
    // Every row leans toward the winner; the cap clamp below bounds the switch rate.
    Eigen::MatrixXd polar =
        Eigen::MatrixXd::Constant(m, m, (1.0 - cfg.polar_mass) / static_cast<double>(m - 1));
    polar.col(winner).setConstant(cfg.polar_mass);
    pi = (1.0 - alpha) * cfg.pi_base + alpha * polar;
  }

  if (state.winner_streak() >= 2 && state.winner_history.back() == winner) {
    pi(winner, winner) += cfg.winner_bias;
  }

  const int ca = find_kind(models, ModelKind::CA);
  const int cv = find_kind(models, ModelKind::CV);
  const bool quiet_window = glr == 0.0 && state.loglik_history.size() >=
                                              static_cast<std::size_t>(cfg.window);
  if (glr > 0.0 && ca >= 0 && ca < m) {
    pi.col(ca).array() += cfg.ca_boost;
  } else if (quiet_window && cv >= 0 && cv < m) {
    pi.col(cv).array() += cfg.cv_boost;
  }

  for (Eigen::Index r = 0; r < m; ++r) {
    normalize_row(pi, r);
    // Excess above the cap goes back to the self-transition, preserving the row sum.
    for (Eigen::Index c = 0; c < m; ++c) {
      if (c != r && pi(r, c) > cfg.cap) {
        pi(r, r) += pi(r, c) - cfg.cap;
        pi(r, c) = cfg.cap;
      }
    }
    // Raise tiny entries to the floor, paying from the row's largest entry.
    for (Eigen::Index c = 0; c < m; ++c) {
      if (pi(r, c) < kTpmFloor) {
        Eigen::Index big = 0;
        pi.row(r).maxCoeff(&big);
        pi(r, big) -= kTpmFloor - pi(r, c);
        pi(r, c) = kTpmFloor;
      }
    }
  }
  return pi;
}

}  // namespace safeimm
