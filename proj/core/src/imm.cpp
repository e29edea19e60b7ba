#include "safeimm/imm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace safeimm {

namespace {

constexpr double kMixingUnderflow = 1e-12;

StateVector order_scale(const Eigen::Vector3d& unit_scale, int dim) {
  StateVector d(dim);
  for (int i = 0; i < dim; ++i) {
    d(i) = unit_scale(i / 3);
  }
  return d;
}

GaussianEstimate scaled(const GaussianEstimate& est, const StateVector& d) {
  if ((d.array() == 1.0).all()) {
    return est;
  }
  GaussianEstimate out;
  out.mean = d.cwiseProduct(est.mean);
  out.cov = d.asDiagonal() * est.cov * d.asDiagonal();
  return out;
}

// Moment-matched combination of estimates that already share a space.
GaussianEstimate moment_match(const std::vector<GaussianEstimate>& ests,
                              const Eigen::VectorXd& weights) {
  const int n = ests.front().dim();
  const double total = weights.sum();
  GaussianEstimate out;
  out.mean = StateVector::Zero(n);
  for (std::size_t i = 0; i < ests.size(); ++i) {
    out.mean += (weights(static_cast<Eigen::Index>(i)) / total) * ests[i].mean;
  }
  out.cov = StateMatrix::Zero(n, n);
  for (std::size_t i = 0; i < ests.size(); ++i) {
    const double a = weights(static_cast<Eigen::Index>(i)) / total;
    if (a == 0.0) continue;
    const StateVector d = ests[i].mean - out.mean;
    out.cov += a * (ests[i].cov + d * d.transpose());
  }
  symmetrize(out.cov);
  return out;
}

}  // namespace

int ModelBank::canonical_index() const {
  int best = 0;
  for (int i = 1; i < size(); ++i) {
    if (models[i].state_dim() > models[best].state_dim()) best = i;
  }
  return best;
}

int ModelBank::winner_index() const {
  int best = 0;
  for (Eigen::Index i = 1; i < weights.size(); ++i) {
    if (weights(i) > weights(best)) best = static_cast<int>(i);
  }
  return best;
}

ModelBank make_bank(std::vector<MotionModel> models, const GaussianEstimate& init, int source,
                    Eigen::VectorXd weights, Eigen::MatrixXd tpm, double pad_variance) {
  ModelBank bank;
  bank.models = std::move(models);
  if (source < 0 || source >= bank.size()) {
    throw std::invalid_argument("make_bank: source model index out of range");
  }
  for (const auto& m : bank.models) {
    bank.estimates.push_back(map_state(bank.models[source], m, init, pad_variance));
  }
  bank.weights = std::move(weights);
  bank.tpm = std::move(tpm);
  validate(bank);
  return bank;
}

void validate(const ModelBank& bank) {
  const auto m = static_cast<Eigen::Index>(bank.models.size());
  if (m == 0) throw std::invalid_argument("bank has no models");
  if (static_cast<Eigen::Index>(bank.estimates.size()) != m || bank.weights.size() != m ||
      bank.tpm.rows() != m || bank.tpm.cols() != m) {
    throw std::invalid_argument("bank dimensions are inconsistent");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (bank.estimates[static_cast<std::size_t>(i)].dim() !=
        bank.models[static_cast<std::size_t>(i)].state_dim()) {
      throw std::invalid_argument("bank estimate dimension does not match its model");
    }
  }
  if ((bank.weights.array() < 0.0).any() || std::abs(bank.weights.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("bank weights are not a probability vector");
  }
  if ((bank.tpm.array() < 0.0).any()) {
    throw std::invalid_argument("bank TPM has negative entries");
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    if (std::abs(bank.tpm.row(r).sum() - 1.0) > 1e-9) {
      throw std::invalid_argument("bank TPM is not row-stochastic");
    }
  }
}

Eigen::VectorXd model_priors(const ModelBank& bank) {
  Eigen::VectorXd c = bank.tpm.transpose() * bank.weights;
  const double s = c.sum();
  if (s > 0.0) c /= s;
  return c;
}

MixResult mix_initial_conditions(const ModelBank& bank, double pad_variance) {
  const int m = bank.size();
  const Eigen::VectorXd cbar = bank.tpm.transpose() * bank.weights;
  MixResult out;
  out.estimates.reserve(static_cast<std::size_t>(m));

  std::vector<GaussianEstimate> mapped(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const auto& target = bank.models[static_cast<std::size_t>(j)];
    if (cbar(j) < kMixingUnderflow) {
      out.degenerate = true;
      out.estimates.push_back(bank.estimates[static_cast<std::size_t>(j)]);
      continue;
    }
    Eigen::VectorXd alpha(m);
    for (int i = 0; i < m; ++i) {
      alpha(i) = bank.tpm(i, j) * bank.weights(i) / cbar(j);
      mapped[static_cast<std::size_t>(i)] =
          map_state(bank.models[static_cast<std::size_t>(i)], target,
                    bank.estimates[static_cast<std::size_t>(i)], pad_variance);
    }
    out.estimates.push_back(moment_match(mapped, alpha));
  }
  return out;
}

PosteriorResult posterior_weights(const Eigen::VectorXd& priors, const Eigen::VectorXd& logliks,
                                  double floor) {
  const Eigen::Index m = priors.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd a(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double ll = logliks(i);
    a(i) = (priors(i) > 0.0 && !std::isnan(ll)) ? std::log(priors(i)) + ll : kNegInf;
    if (a(i) == std::numeric_limits<double>::infinity()) a(i) = kNegInf;
  }
  PosteriorResult out;
  const double top = a.maxCoeff();
  if (!std::isfinite(top)) {
    out.weights = priors / priors.sum();
    out.fallback = true;
    return out;
  }
  out.weights = (a.array() - top).exp().matrix();
  out.weights /= out.weights.sum();

  if (floor > 0.0 && (out.weights.array() < floor).any()) {
    out.weights = out.weights.cwiseMax(floor);
    out.weights /= out.weights.sum();
  }
  return out;
}

GaussianEstimate mixture_moments(const ModelBank& bank, int target, double pad_variance) {
  const auto& to = bank.models.at(static_cast<std::size_t>(target));
  std::vector<GaussianEstimate> mapped;
  mapped.reserve(bank.estimates.size());
  for (std::size_t i = 0; i < bank.estimates.size(); ++i) {
    mapped.push_back(map_state(bank.models[i], to, bank.estimates[i], pad_variance));
  }
  return moment_match(mapped, bank.weights);
}

DriftBound drift_bound(const ModelBank& bank, double pad_variance,
                       const Eigen::Vector3d& unit_scale) {
  DriftBound out;
  const int m = bank.size();
  const int w = bank.winner_index();
  const auto& wm = bank.models[static_cast<std::size_t>(w)];
  const int n = wm.state_dim();
  const StateVector d = order_scale(unit_scale, n);
  const double total = bank.weights.sum();

  std::vector<GaussianEstimate> mapped(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    mapped[static_cast<std::size_t>(i)] = scaled(
        map_state(bank.models[static_cast<std::size_t>(i)], wm,
                  bank.estimates[static_cast<std::size_t>(i)], pad_variance),
        d);
  }
  const auto& winner = mapped[static_cast<std::size_t>(w)];

  double rival_mass = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i != w) rival_mass += bank.weights(i);
  }

  out.winner = w;
  out.winner_prob = bank.weights(w) / total;
  out.tail = rival_mass / total;
  out.winner_mean = winner.mean;
  out.mixture_mean = StateVector::Zero(n);
  for (int i = 0; i < m; ++i) {
    out.mixture_mean += (bank.weights(i) / total) * mapped[static_cast<std::size_t>(i)].mean;
  }

  if (!(rival_mass > 0.0)) {
    out.pbar = winner.cov;
    out.bound = 0.0;
    out.dbar2 = 0.0;
    return out;
  }

  out.pbar = winner.cov;
  for (int i = 0; i < m; ++i) {
    if (i == w) continue;
    out.pbar += (bank.weights(i) / rival_mass) * mapped[static_cast<std::size_t>(i)].cov;
  }
  out.pbar *= 0.5;
  symmetrize(out.pbar);

  Eigen::LLT<StateMatrix> llt(out.pbar);
  double lambda = 1e-9 * std::max(out.pbar.trace(), 1e-300) / n;
  for (int attempt = 0; llt.info() != Eigen::Success && attempt < 12; ++attempt) {
    out.jitter = lambda;
    llt.compute(out.pbar + lambda * StateMatrix::Identity(n, n));
    lambda *= 10.0;
  }
  if (out.jitter > 0.0) {
    out.pbar += out.jitter * StateMatrix::Identity(n, n);
  }

  double dbar2 = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == w) continue;
    const StateVector delta = mapped[static_cast<std::size_t>(i)].mean - winner.mean;
    const StateVector y = llt.matrixL().solve(delta);
    dbar2 += (bank.weights(i) / rival_mass) * y.squaredNorm();
  }
  out.dbar2 = dbar2;
  out.bound = out.tail * std::sqrt(out.pbar.trace() * dbar2);
  return out;
}

SafeOutput safe_output(const ModelBank& bank, const GateConfig& cfg, double pad_variance) {
  const DriftBound db = drift_bound(bank, pad_variance, cfg.unit_scale);
  const double total = bank.weights.sum();

  double runner_up = 0.0;
  for (int i = 0; i < bank.size(); ++i) {
    if (i != db.winner) runner_up = std::max(runner_up, bank.weights(i) / total);
  }

  SafeOutput out;
  auto& dec = out.decision;
  dec.bound = db.bound;
  dec.epsilon = cfg.epsilon;
  dec.winner_idx = db.winner;
  dec.winner_prob = db.winner_prob;
  dec.tail = db.tail;
  dec.margin = db.winner_prob - runner_up;
  dec.margin_ok = dec.margin >= cfg.margin;
  dec.actual_drift = (db.mixture_mean - db.winner_mean).norm();
  dec.dbar2 = db.dbar2;
  dec.trace_pbar = db.pbar.trace();
  dec.loglik_margin = std::numeric_limits<double>::quiet_NaN();

  const bool pass = cfg.enabled && db.bound <= cfg.epsilon && dec.margin_ok;
  out.streak = bank.streak;
  if (pass) {
    const bool same = out.streak.last_winner && *out.streak.last_winner == db.winner;
    out.streak.consecutive_pass = same ? out.streak.consecutive_pass + 1 : 1;
  } else {
    out.streak.consecutive_pass = 0;
  }
  out.streak.last_winner = db.winner;
  dec.streak_len = out.streak.consecutive_pass;
  dec.fired = pass && out.streak.consecutive_pass >= cfg.streak_len;

  const int canonical = bank.canonical_index();
  if (dec.fired) {
    out.estimate = map_state(bank.models[static_cast<std::size_t>(db.winner)],
                             bank.models[static_cast<std::size_t>(canonical)],
                             bank.estimates[static_cast<std::size_t>(db.winner)], pad_variance);
  } else {
    out.estimate = mixture_moments(bank, canonical, pad_variance);
  }
  return out;
}

ModelBank imm_predict(const ModelBank& bank, double dt, const ImmConfig& cfg,
                      bool* degenerate_mixing) {
  ModelBank out = bank;
  MixResult mix = mix_initial_conditions(bank, cfg.pad_variance);
  if (degenerate_mixing) *degenerate_mixing = mix.degenerate;
  for (int j = 0; j < bank.size(); ++j) {
    out.estimates[static_cast<std::size_t>(j)] =
        predict(mix.estimates[static_cast<std::size_t>(j)],
                bank.models[static_cast<std::size_t>(j)], dt);
  }
  out.weights = model_priors(bank);
  return out;
}

ImmStepResult imm_correct(const ModelBank& predicted, const MeasVector& z, const MeasMatrix& r,
                          const ImmConfig& cfg) {
  const int m = predicted.size();
  ImmStepResult res;
  res.bank = predicted;

  Eigen::VectorXd logliks(m);
  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    auto up = update(predicted.estimates[ju], predicted.models[ju], z, r);
    if (!up) {
      logliks(j) = -std::numeric_limits<double>::infinity();
      ++res.failed_updates;
      continue;
    }
    res.bank.estimates[ju] = up->posterior;
    const auto ll = cfg.likelihood == Likelihood::StudentT
                        ? student_t_loglik(up->innovation, cfg.nu)
                        : gaussian_loglik(up->innovation);
    logliks(j) = ll.value_or(-std::numeric_limits<double>::infinity());
  }

  PosteriorResult post = posterior_weights(predicted.weights, logliks, cfg.prob_floor);
  res.posterior_fallback = post.fallback;
  res.bank.weights = post.weights;

  const int winner = res.bank.winner_index();
  if (cfg.tpm.enabled && cfg.tpm.pi_base.rows() == m) {
    res.bank.adapt.push(logliks, winner, cfg.tpm.window);
    res.bank.tpm = adapt_tpm(cfg.tpm, res.bank.adapt, res.bank.weights, res.bank.models);
  }

  SafeOutput safe = safe_output(res.bank, cfg.gate, cfg.pad_variance);
  res.bank.streak = safe.streak;
  res.output = std::move(safe.estimate);
  res.decision = safe.decision;

  double rival = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    if (i != winner) rival = std::max(rival, logliks(i));
  }
  res.decision.loglik_margin =
      m > 1 ? logliks(winner) - rival : std::numeric_limits<double>::quiet_NaN();
  return res;
}

ImmStepResult imm_coast(const ModelBank& predicted, const ImmConfig& cfg) {
  ImmStepResult res;
  res.bank = predicted;
  SafeOutput safe = safe_output(res.bank, cfg.gate, cfg.pad_variance);
  res.bank.streak = safe.streak;
  res.output = std::move(safe.estimate);
  res.decision = safe.decision;
  return res;
}

ImmStepResult imm_step(const ModelBank& bank, const std::optional<MeasVector>& z,
                       const MeasMatrix& r, double dt, const ImmConfig& cfg) {
  bool degenerate = false;
  ModelBank predicted = imm_predict(bank, dt, cfg, &degenerate);
  ImmStepResult res = z ? imm_correct(predicted, *z, r, cfg) : imm_coast(predicted, cfg);
  res.degenerate_mixing = degenerate;
  return res;
}

}  // namespace safeimm
