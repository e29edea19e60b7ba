#include "safeimm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <random>

namespace safeimm {

namespace {

using Clock = std::chrono::steady_clock;

LatencyStats stats(std::vector<double>& us, double total_seconds) {
  LatencyStats s;
  s.samples = static_cast<long>(us.size());
  if (us.empty()) return s;
  std::sort(us.begin(), us.end());
  auto pct = [&](double q) {
    const auto i = static_cast<std::size_t>(q * static_cast<double>(us.size() - 1));
    return us[i];
  };
  s.p50_us = pct(0.50);
  s.p99_us = pct(0.99);
  s.per_second = total_seconds > 0.0 ? static_cast<double>(us.size()) / total_seconds : 0.0;
  return s;
}

double micros(Clock::duration d) {
  return std::chrono::duration<double, std::micro>(d).count();
}

}  // namespace

BenchReport measure_throughput(const RunConfig& cfg, const BenchOptions& opts) {
  BenchReport report;
  const TrackerConfig tcfg = make_tracker_config(cfg);
  const Eigen::Matrix3d r = filter_measurement_cov(cfg);
  const double dt = cfg.scenario.dt;
  const double sigma = std::sqrt(r(0, 0));

  // Single-track IMM: a straight 8 m/s target with measurement noise.
  {
    GaussianEstimate init;
    init.mean = StateVector::Zero(9);
    init.mean(3) = 8.0;
    init.cov = StateMatrix::Identity(9, 9) * 10.0;
    const auto m = static_cast<Eigen::Index>(tcfg.models.size());
    Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    Eigen::MatrixXd tpm = tcfg.imm.tpm.pi_base.rows() == m ? tcfg.imm.tpm.pi_base
                                                         : Eigen::MatrixXd::Identity(m, m);
    const int src = static_cast<int>(std::distance(
        tcfg.models.begin(),
        std::max_element(tcfg.models.begin(), tcfg.models.end(),
                         [](const auto& a, const auto& b) { return a.state_dim() < b.state_dim(); })));
    init.mean.conservativeResize(tcfg.models[static_cast<std::size_t>(src)].state_dim());
    init.cov.conservativeResize(init.mean.size(), init.mean.size());
    ModelBank bank = make_bank(tcfg.models, init, src, w, tpm, tcfg.imm.pad_variance);

    std::mt19937_64 rng(cfg.scenario.seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    const int total = opts.warmup + opts.imm_steps;
    std::vector<MeasVector> zs(static_cast<std::size_t>(total));
    for (int k = 0; k < total; ++k) {
      zs[static_cast<std::size_t>(k)] =
          MeasVector(8.0 * (k + 1) * dt, 0.0, 0.0) + sigma * MeasVector(n01(rng), n01(rng), n01(rng));
    }
    std::vector<double> lat;
    lat.reserve(static_cast<std::size_t>(opts.imm_steps));
    const auto t0 = Clock::now();
    Clock::time_point timed_start = t0;
    for (int k = 0; k < total; ++k) {
      if (k == opts.warmup) timed_start = Clock::now();
      const auto a = Clock::now();
      ImmStepResult step = imm_step(bank, zs[static_cast<std::size_t>(k)], r, dt, tcfg.imm);
      bank = std::move(step.bank);
      const auto b = Clock::now();
      if (k >= opts.warmup) lat.push_back(micros(b - a));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - timed_start).count();
    report.imm_step = stats(lat, secs);
  }

  // End-to-end frames of the configured scenario, looped.
  {
    const auto truth = generate_truth(cfg.scenario);
    const auto meas = generate_measurements(truth, cfg.scenario);
    std::vector<std::vector<Eigen::Vector3d>> frames;
    for (const auto& f : meas.frames) {
      std::vector<Eigen::Vector3d> d;
      for (const auto& det : f.detections) d.push_back(det.z);
      frames.push_back(std::move(d));
    }
    TrackerState state;
    std::vector<double> lat;
    double secs = 0.0;
    const int total = opts.warmup + opts.frames;
    for (int k = 0; k < total; ++k) {
      const std::size_t fi = static_cast<std::size_t>(k) % frames.size();
      if (fi == 0) state = TrackerState{};
      const auto a = Clock::now();
      tracker_step(state, frames[fi], dt, r, tcfg);
      const auto b = Clock::now();
      if (k >= opts.warmup) {
        lat.push_back(micros(b - a));
        secs += std::chrono::duration<double>(b - a).count();
      }
    }
    report.tracker_frame = stats(lat, secs);
  }

  // Scaling: N straight targets on a 50 m grid, noiseless detections.
  for (int n : opts.track_counts) {
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    TrackerState state;
    std::vector<Eigen::Vector3d> dets(static_cast<std::size_t>(n));
    const int warm = 10;
    double secs = 0.0;
    for (int k = 0; k < warm + opts.scaling_frames; ++k) {
      for (int i = 0; i < n; ++i) {
        dets[static_cast<std::size_t>(i)] =
            Eigen::Vector3d(50.0 * (i % side) + 5.0 * k * dt, 50.0 * (i / side), 0.0);
      }
      const auto a = Clock::now();
      tracker_step(state, dets, dt, r, tcfg);
      const auto b = Clock::now();
      if (k >= warm) secs += std::chrono::duration<double>(b - a).count();
    }
    ScalingPoint p;
    p.tracks = n;
    p.frames_per_second = secs > 0.0 ? opts.scaling_frames / secs : 0.0;
    p.track_updates_per_second = p.frames_per_second * n;
    report.scaling.push_back(p);
  }
  return report;
}

}  // namespace safeimm
