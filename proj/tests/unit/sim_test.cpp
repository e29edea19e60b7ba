#include <cmath>

#include <gtest/gtest.h>

#include "safeimm/sim.hpp"

namespace safeimm {
namespace {

TEST(Sim, DefaultShape) {
  const ScenarioConfig cfg;
  EXPECT_EQ(cfg.steps(), 300);
  const auto truth = generate_truth(cfg);
  ASSERT_EQ(truth.size(), 3u);
  for (const auto& t : truth) EXPECT_EQ(t.states.size(), 300u);
}

TEST(Sim, ConstantVelocityTargetIsExact) {
  const ScenarioConfig cfg;
  const auto& spec = cfg.targets[0];
  const auto truth = generate_truth(cfg);
  for (std::size_t k = 0; k < truth[0].states.size(); ++k) {
    const Eigen::Vector3d want = spec.position + spec.velocity * (static_cast<double>(k) * cfg.dt);
    EXPECT_LT((truth[0].states[k].pos - want).norm(), 1e-9);
  }
}

TEST(Sim, VelocityMatchesFiniteDifferenceOffManeuver) {
  const ScenarioConfig cfg;
  const auto truth = generate_truth(cfg);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& s = truth[i].states;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      if (s[k].acc.norm() > 0.0 || s[k + 1].acc.norm() > 0.0) continue;
      const Eigen::Vector3d fd = (s[k + 1].pos - s[k].pos) / cfg.dt;
      EXPECT_LT((fd - s[k].vel).norm(), 1e-9) << "target " << i << " step " << k;
    }
  }
}

TEST(Sim, AccelerationMatchesSecondDifference) {
  const ScenarioConfig cfg;
  const auto& s = generate_truth(cfg)[2].states;
  int checked = 0;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    // Interior of an acceleration burst: both neighbouring intervals share the same acceleration.
    if (s[k - 1].acc.norm() == 0.0 || (s[k - 1].acc - s[k].acc).norm() > 1e-12) continue;
    const Eigen::Vector3d sd = (s[k + 1].pos - 2.0 * s[k].pos + s[k - 1].pos) / (cfg.dt * cfg.dt);
    EXPECT_LT((sd - s[k].acc).norm(), 1e-6) << k;
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Sim, LateralManeuverTurnsNinetyDegrees) {
  const ScenarioConfig cfg;
  const auto& s = generate_truth(cfg)[1].states;
  const Eigen::Vector3d before = s[90].vel;
  const Eigen::Vector3d after = s[140].vel;
  EXPECT_NEAR(before.norm(), after.norm(), 1e-9);
  EXPECT_NEAR(before.dot(after), 0.0, 1e-6);
}

TEST(Sim, NoiselessMeasurementsEqualTruth) {
  ScenarioConfig cfg;
  cfg.noise = {0.0, 0.0};
  const auto truth = generate_truth(cfg);
  const auto meas = generate_measurements(truth, cfg);
  for (const auto& f : meas.frames) {
    ASSERT_EQ(f.detections.size(), 3u);
    for (const auto& d : f.detections) {
      EXPECT_EQ(d.z, truth[static_cast<std::size_t>(d.target_id)].states[static_cast<std::size_t>(f.step)].pos);
    }
  }
}

TEST(Sim, DeterministicPerSeed) {
  ScenarioConfig cfg;
  cfg.clutter_rate = 2.0;
  cfg.detection_prob = 0.9;
  const auto truth = generate_truth(cfg);
  const auto a = generate_measurements(truth, cfg);
  const auto b = generate_measurements(truth, cfg);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t k = 0; k < a.frames.size(); ++k) {
    ASSERT_EQ(a.frames[k].detections.size(), b.frames[k].detections.size());
    for (std::size_t i = 0; i < a.frames[k].detections.size(); ++i) {
      EXPECT_EQ(a.frames[k].detections[i].z, b.frames[k].detections[i].z);
    }
  }
  cfg.seed = 2;
  const auto c = generate_measurements(truth, cfg);
  EXPECT_NE(a.frames[0].detections[0].z, c.frames[0].detections[0].z);
}

TEST(Sim, PositionNoiseStatistics) {
  ScenarioConfig cfg;
  cfg.noise = {2.0, 0.0};
  cfg.duration = 1000.0;  // 10⁴ steps
  cfg.targets.resize(1);
  const auto truth = generate_truth(cfg);
  const auto meas = generate_measurements(truth, cfg);
  const auto n = static_cast<double>(meas.frames.size());
  ASSERT_GE(n, 1e4);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  for (const auto& f : meas.frames) {
    const Eigen::Vector3d e = f.detections[0].z - truth[0].states[static_cast<std::size_t>(f.step)].pos;
    mean += e;
    second += e * e.transpose();
  }
  mean /= n;
  const Eigen::Matrix3d cov = second / n - mean * mean.transpose();
  const double var = 4.0;
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(std::sqrt(cov(i, i)), 2.0, 0.05 * 2.0);
    EXPECT_NEAR(cov(i, i), var, 3.0 * var * std::sqrt(2.0 / n));
    EXPECT_NEAR(mean(i), 0.0, 3.0 * std::sqrt(var / n));
    for (int j = 0; j < i; ++j) EXPECT_NEAR(cov(i, j), 0.0, 3.0 * var / std::sqrt(n));
  }
}

TEST(Sim, VelocityJitterDisplacesRealizedTruth) {
  ScenarioConfig cfg = named_scenario("profile2");
  const auto truth = generate_truth(cfg);
  const auto meas = generate_measurements(truth, cfg);
  const auto& nominal = truth[0].states.back().pos;
  const auto& realized = meas.realized[0].states.back().pos;
  EXPECT_GT((nominal - realized).norm(), 0.1);
  EXPECT_EQ(nominal.z(), realized.z());
}

TEST(Sim, ClutterAndDetectionProbability) {
  ScenarioConfig cfg;
  cfg.clutter_rate = 4.0;
  cfg.detection_prob = 0.5;
  cfg.duration = 200.0;
  const auto meas = generate_measurements(generate_truth(cfg), cfg);
  double clutter = 0;
  double hits = 0;
  for (const auto& f : meas.frames) {
    for (const auto& d : f.detections) (d.target_id < 0 ? clutter : hits) += 1.0;
  }
  const double n = static_cast<double>(meas.frames.size());
  EXPECT_NEAR(clutter / n, 4.0, 0.15);
  EXPECT_NEAR(hits / (3.0 * n), 0.5, 0.03);
}

TEST(Sim, JammingInflatesSomeErrors) {
  ScenarioConfig cfg;
  cfg.noise = {1.0, 0.0};
  cfg.jamming = true;
  cfg.duration = 300.0;
  const auto truth = generate_truth(cfg);
  const auto meas = generate_measurements(truth, cfg);
  double big = 0;
  double total = 0;
  for (const auto& f : meas.frames) {
    for (const auto& d : f.detections) {
      total += 1.0;
      if ((d.z - truth[static_cast<std::size_t>(d.target_id)].states[static_cast<std::size_t>(f.step)].pos).norm() > 6.0) big += 1.0;
    }
  }
  // Plain 3D unit noise essentially never exceeds 6; the 10x draws usually do.
  EXPECT_NEAR(big / total, 0.05 * 0.97, 0.012);
}

TEST(Sim, RejectsInvalidConfig) {
  ScenarioConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.detection_prob = 0.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.duration = 30.05;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  EXPECT_THROW(named_scenario("nope"), std::invalid_argument);
}

}  // namespace
}  // namespace safeimm
