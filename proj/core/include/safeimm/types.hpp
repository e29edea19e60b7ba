#pragma once

#include <Eigen/Core>

namespace safeimm {

/// Largest state dimension of any supported motion model (CA: 9).
inline constexpr int kMaxStateDim = 9;
/// Position-only measurements in 3D.
inline constexpr int kMeasDim = 3;

// Dynamic-size with a fixed upper bound: no heap traffic in the filter hot path.
using StateVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                                  kMaxStateDim, kMaxStateDim>;
using MeasStateMatrix = Eigen::Matrix<double, kMeasDim, Eigen::Dynamic, Eigen::ColMajor,
                                      kMeasDim, kMaxStateDim>;
using StateMeasMatrix = Eigen::Matrix<double, Eigen::Dynamic, kMeasDim, Eigen::ColMajor,
                                      kMaxStateDim, kMeasDim>;
using MeasVector = Eigen::Vector3d;
using MeasMatrix = Eigen::Matrix3d;

/// A Gaussian N(mean, cov). The unit every filter stage consumes and produces.
struct GaussianEstimate {
  StateVector mean;
  StateMatrix cov;

  [[nodiscard]] int dim() const { return static_cast<int>(mean.size()); }
};

}  // namespace safeimm
