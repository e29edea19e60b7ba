#pragma once

#include <optional>

#include <Eigen/Cholesky>

#include "safeimm/models.hpp"
#include "safeimm/types.hpp"

namespace safeimm {

/// Measurement residual v = z - H mu and its covariance S = H P H^T + R.
struct Innovation {
  MeasVector v = MeasVector::Zero();
  MeasMatrix s = MeasMatrix::Identity();

  /// Squared Mahalanobis distance v^T S^-1 v, or nullopt if S is not usable.
  [[nodiscard]] std::optional<double> mahalanobis2() const;
};

struct UpdateResult {
  GaussianEstimate posterior;
  Innovation innovation;
};

/// Reciprocal condition number below which S is treated as singular.
inline constexpr double kMinInnovationRcond = 1e-12;

/// Cholesky factor of S, or nullopt when S fails the conditioning guard.
std::optional<Eigen::LLT<MeasMatrix>> factor_innovation(const MeasMatrix& s);

GaussianEstimate predict(const GaussianEstimate& est, const MotionModel& model, double dt);

/// Innovation of `z` against the predicted measurement of `est`.
Innovation innovation(const GaussianEstimate& est, const MotionModel& model,
                      const MeasVector& z, const MeasMatrix& r);

/// Kalman update with the Joseph-form covariance. Returns nullopt when S is
/// numerically singular.
std::optional<UpdateResult> update(const GaussianEstimate& est, const MotionModel& model,
                                   const MeasVector& z, const MeasMatrix& r);

/// Normalized Gaussian log-density of the innovation.
std::optional<double> gaussian_loglik(const Innovation& inn);

/// Multivariate Student-t log-density, dof `nu`, scale S (no nu/(nu-2)
/// moment correction). nu <= 0 yields nullopt.
std::optional<double> student_t_loglik(const Innovation& inn, double nu);

/// (P + P^T) / 2
void symmetrize(StateMatrix& p);

/// Symmetric within `sym_tol` (relative) and all eigenvalues > -`eig_tol` * trace.
bool is_psd(const StateMatrix& p, double sym_tol = 1e-9, double eig_tol = 1e-12);

}  // namespace safeimm
