#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "safeimm/tpm_adapt.hpp"
#include "support/random.hpp"

namespace safeimm {
namespace {

const std::vector<MotionModel> kCvCa = {MotionModel::cv(), MotionModel::ca()};

AdaptState history(const std::vector<std::pair<Eigen::Vector2d, int>>& steps, int window = 5) {
  AdaptState s;
  for (const auto& [ll, w] : steps) s.push(ll, w, window);
  return s;
}

void expect_stochastic(const Eigen::MatrixXd& pi) {
  for (Eigen::Index r = 0; r < pi.rows(); ++r) {
    EXPECT_NEAR(pi.row(r).sum(), 1.0, 1e-12);
  }
  EXPECT_GE(pi.minCoeff(), kTpmFloor * (1.0 - 1e-12));
  EXPECT_LE(pi.maxCoeff(), 1.0);
}

TEST(Glr, Definition) {
  EXPECT_EQ(glr_statistic(history({{{0.0, -1.0}, 0}, {{-2.0, -3.0}, 0}})), 0.0);
  EXPECT_NEAR(glr_statistic(history({{{0.0, std::log(2.0)}, 0}}, 1)), std::log(2.0), 1e-15);
  EXPECT_EQ(glr_statistic(AdaptState{}), 0.0);
}

TEST(Glr, WindowTrimsHistory) {
  AdaptState s;
  for (int i = 0; i < 20; ++i) s.push(Eigen::Vector2d(0.0, 1.0), 0, 5);
  EXPECT_EQ(s.loglik_history.size(), 5u);
  EXPECT_EQ(s.winner_history.size(), 5u);
  EXPECT_NEAR(glr_statistic(s), 5.0, 1e-12);
}

TEST(Glr, MonotoneInRivalAdvantage) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_int_distribution<int> pick(0, 4);
  std::uniform_real_distribution<double> bump(0.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    AdaptState s;
    for (int k = 0; k < 5; ++k) s.push(Eigen::Vector2d(n(rng), n(rng)), 0, 5);
    const double before = glr_statistic(s);
    s.loglik_history[static_cast<std::size_t>(pick(rng))](1) += bump(rng);
    EXPECT_GE(glr_statistic(s), before);
  }
}

TEST(Entropy, Values) {
  EXPECT_EQ(weight_entropy(Eigen::Vector2d(1.0, 0.0)), 0.0);
  EXPECT_NEAR(weight_entropy(Eigen::Vector2d(0.5, 0.5)), 1.0, 1e-15);
  EXPECT_NEAR(weight_entropy(Eigen::VectorXd::Constant(3, 1.0 / 3)), 1.0, 1e-15);
  const double h = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25));
  EXPECT_NEAR(weight_entropy(Eigen::Vector2d(0.75, 0.25)), h, 1e-15);
  EXPECT_NEAR(h, 0.8113, 5e-5);
}

TEST(Alpha, ClampsAtMax) {
  TpmConfig cfg;
  EXPECT_DOUBLE_EQ(blend_alpha(cfg, 10.0, 1.0), 0.7);
  EXPECT_DOUBLE_EQ(blend_alpha(cfg, 0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(blend_alpha(cfg, 1.0, 0.2), 0.2);
  double prev = 0.0;
  for (double g = 0.0; g < 20.0; g += 0.1) {
    const double a = blend_alpha(cfg, g, 0.3);
    EXPECT_GE(a, prev);
    prev = a;
  }
}

TEST(AdaptTpm, DisabledReturnsBase) {
  TpmConfig cfg;
  cfg.enabled = false;
  const auto s = history({{{0.0, 5.0}, 1}, {{0.0, 5.0}, 1}});
  EXPECT_EQ(adapt_tpm(cfg, s, Eigen::Vector2d(0.5, 0.5), kCvCa), cfg.pi_base);
}

TEST(AdaptTpm, IdentityWhenSignalsAreQuiet) {
  TpmConfig cfg;
  // Incumbent best, one-hot weights, streak 1, history shorter than the window.
  const auto s = history({{{0.0, -1.0}, 0}});
  const auto pi = adapt_tpm(cfg, s, Eigen::Vector2d(1.0, 0.0), kCvCa);
  EXPECT_LT((pi - cfg.pi_base).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AdaptTpm, StreakBiasAndCvBoost) {
  TpmConfig cfg;
  const auto s = history({{{0.0, -1.0}, 0}, {{0.0, -1.0}, 0}, {{0.0, -1.0}, 0},
                          {{0.0, -1.0}, 0}, {{0.0, -1.0}, 0}});
  const auto pi = adapt_tpm(cfg, s, Eigen::Vector2d(1.0, 0.0), kCvCa);
  // Row 0: base + winner bias + CV boost, renormalized.
  const double r0 = (0.992 + 0.10 + 0.05) / (1.0 + 0.10 + 0.05);
  EXPECT_NEAR(pi(0, 0), r0, 1e-12);
  const double r1 = (0.015 + 0.05) / (1.0 + 0.05);
  EXPECT_NEAR(pi(1, 0), r1, 1e-12);
  expect_stochastic(pi);
}

TEST(AdaptTpm, ManeuverOnsetBoostsCa) {
  TpmConfig cfg;
  const auto s = history({{{0.0, 2.0}, 0}});
  const Eigen::Vector2d w(1.0, 0.0);
  const auto pi = adapt_tpm(cfg, s, w, kCvCa);
  const double alpha = blend_alpha(cfg, 2.0, 0.0);
  const double p01 = (1.0 - alpha) * 0.008 + cfg.ca_boost;
  EXPECT_NEAR(pi(0, 1), p01 / (1.0 + cfg.ca_boost), 1e-12);
  EXPECT_GT(pi(0, 1), cfg.pi_base(0, 1));
  expect_stochastic(pi);
}

TEST(AdaptTpm, CapLimitsOffDiagonal) {
  TpmConfig cfg;
  cfg.cap = 0.2;
  const auto s = history({{{0.0, 50.0}, 1}, {{0.0, 50.0}, 1}});
  const auto pi = adapt_tpm(cfg, s, Eigen::Vector2d(0.0, 1.0), kCvCa);
  EXPECT_LE(pi(0, 1), 0.2 + 1e-15);
  expect_stochastic(pi);
}

TEST(AdaptTpm, FuzzedOutputsStayStochastic) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 20.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5000; ++trial) {
    TpmConfig cfg;
    cfg.alpha_max = u(rng);
    cfg.g_glr = 3.0 * u(rng);
    cfg.g_ent = 3.0 * u(rng);
    cfg.winner_bias = u(rng);
    cfg.ca_boost = u(rng);
    cfg.cv_boost = u(rng);
    cfg.cap = 0.01 + 0.98 * u(rng);
    cfg.polar_mass = u(rng);
    const bool three = trial % 2 == 1;
    const std::vector<MotionModel> models =
        three ? std::vector<MotionModel>{MotionModel::cv(), MotionModel::ca(), MotionModel::cv(2.0)}
              : kCvCa;
    const int m = static_cast<int>(models.size());
    cfg.pi_base = Eigen::MatrixXd(m, m);
    for (int r = 0; r < m; ++r) cfg.pi_base.row(r) = testing::random_simplex(rng, m).transpose();
    AdaptState s;
    for (int k = 0; k < 7; ++k) {
      Eigen::VectorXd ll(m);
      for (int i = 0; i < m; ++i) ll(i) = u(rng) < 0.05 ? -INFINITY : n(rng);
      s.push(ll, static_cast<int>(u(rng) * m), cfg.window);
    }
    const auto pi = adapt_tpm(cfg, s, testing::random_simplex(rng, m), models);
    expect_stochastic(pi);
    ASSERT_TRUE(pi.allFinite());
  }
}

TEST(AdaptTpm, ValidateRejectsBadConfig) {
  TpmConfig cfg;
  cfg.alpha_max = 1.5;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.cap = 1.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.g_glr = -1.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.pi_base(0, 0) = 0.5;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace safeimm
