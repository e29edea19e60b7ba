#pragma once

#include <vector>

#include "safeimm/runner.hpp"

namespace safeimm {

struct BenchOptions {
  int warmup = 500;
  /// Timed single-track imm_step calls.
  int imm_steps = 20000;
  /// Timed frames of the default three-target scenario.
  int frames = 3000;
  /// Track counts for the scaling sweep.
  std::vector<int> track_counts = {1, 10, 50, 100};
  int scaling_frames = 200;
};

struct LatencyStats {
  double per_second = 0.0;
  double p50_us = 0.0;
  double p99_us = 0.0;
  long samples = 0;
};

struct ScalingPoint {
  int tracks = 0;
  double frames_per_second = 0.0;
  /// frames/s times tracks.
  double track_updates_per_second = 0.0;
};

struct BenchReport {
  LatencyStats imm_step;
  LatencyStats tracker_frame;
  std::vector<ScalingPoint> scaling;
};

/// Wall-clock throughput of the filter and the full tracker, single-threaded.
BenchReport measure_throughput(const RunConfig& cfg, const BenchOptions& opts = {});

}  // namespace safeimm
