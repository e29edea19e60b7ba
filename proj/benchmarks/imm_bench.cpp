#include <random>

#include <benchmark/benchmark.h>

#include "safeimm/imm.hpp"

namespace {

using namespace safeimm;

ModelBank straight_bank() {
  GaussianEstimate init;
  init.mean = StateVector::Zero(9);
  init.mean(3) = 8.0;
  init.cov = StateMatrix::Identity(9, 9) * 10.0;
  Eigen::Vector2d w(0.9, 0.1);
  return make_bank({MotionModel::cv(), MotionModel::ca()}, init, 1, w, TpmConfig::default_pi_base());
}

void BM_ImmStep(benchmark::State& state) {
  ImmConfig cfg;
  cfg.likelihood = state.range(0) == 0 ? Likelihood::Gaussian : Likelihood::StudentT;
  cfg.tpm.enabled = state.range(1) != 0;
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() * 4.0;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 2.0);
  ModelBank bank = straight_bank();
  long k = 0;
  for (auto _ : state) {
    ++k;
    const MeasVector z(0.8 * static_cast<double>(k) + n(rng), n(rng), n(rng));
    bank = imm_step(bank, z, r, 0.1, cfg).bank;
    benchmark::DoNotOptimize(bank.weights.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ImmStep)->ArgNames({"student_t", "adaptive"})->Args({0, 0})->Args({1, 0})->Args({1, 1});

void BM_DriftBound(benchmark::State& state) {
  const ModelBank bank = straight_bank();
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift_bound(bank).bound);
  }
}
BENCHMARK(BM_DriftBound);

}  // namespace
