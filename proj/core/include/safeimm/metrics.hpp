#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace safeimm {

struct RmseResult {
  double value = 0.0;
  /// Frames with an estimate.
  int matched = 0;
  /// Frames without one; excluded from the average.
  int gaps = 0;
};

/// Per-axis RMSE of `est` against `truth` over the frames where `est` has a value.
RmseResult rmse(std::span<const Eigen::Vector3d> truth,
                std::span<const std::optional<Eigen::Vector3d>> est, int axis);

struct OspaResult {
  double total = 0.0;
  double loc = 0.0;
  double card = 0.0;
};

/// OSPA distance with cutoff `c` and order `p`; loc and card are the
/// localization and cardinality components (total = loc + card for p = 1).
/// Throws std::invalid_argument unless c > 0 and p >= 1.
OspaResult ospa(std::span<const Eigen::Vector3d> x, std::span<const Eigen::Vector3d> y,
                double c = 2.0, double p = 1.0);

}  // namespace safeimm
