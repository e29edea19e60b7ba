#include "safeimm/kalman.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace safeimm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

double log_det(const Eigen::LLT<MeasMatrix>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

std::optional<Eigen::LLT<MeasMatrix>> factor_innovation(const MeasMatrix& s) {
  if (!s.allFinite()) {
    return std::nullopt;
  }
  Eigen::SelfAdjointEigenSolver<MeasMatrix> eig;
  eig.computeDirect(s, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || lo < kMinInnovationRcond * hi) {
    return std::nullopt;
  }
  Eigen::LLT<MeasMatrix> llt(s);
  if (llt.info() != Eigen::Success) {
    return std::nullopt;
  }
  return llt;
}

std::optional<double> Innovation::mahalanobis2() const {
  auto llt = factor_innovation(s);
  if (!llt) {
    return std::nullopt;
  }
  const MeasVector y = llt->matrixL().solve(v);
  return y.squaredNorm();
}

void symmetrize(StateMatrix& p) {
  p = 0.5 * (p + p.transpose()).eval();
}

bool is_psd(const StateMatrix& p, double sym_tol, double eig_tol) {
  if (!p.allFinite() || p.rows() != p.cols()) {
    return false;
  }
  const double scale = std::max(p.cwiseAbs().maxCoeff(), 1e-300);
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) {
    return false;
  }
  const StateMatrix sym = 0.5 * (p + p.transpose());
  Eigen::SelfAdjointEigenSolver<StateMatrix> eig(sym, Eigen::EigenvaluesOnly);
  const double trace = std::abs(sym.trace());
  return eig.eigenvalues().minCoeff() > -eig_tol * std::max(trace, 1e-300);
}

GaussianEstimate predict(const GaussianEstimate& est, const MotionModel& model, double dt) {
  const StateMatrix f = transition_matrix(model, dt);
  GaussianEstimate out;
  out.mean = f * est.mean;
  out.cov = f * est.cov * f.transpose() + process_noise(model, dt);
  symmetrize(out.cov);
  return out;
}

Innovation innovation(const GaussianEstimate& est, const MotionModel& model,
                      const MeasVector& z, const MeasMatrix& r) {
  // H selects the leading position block, so H P H^T is a corner slice.
  (void)model;
  Innovation inn;
  inn.v = z - est.mean.head<3>();
  inn.s = est.cov.topLeftCorner<3, 3>() + r;
  inn.s = 0.5 * (inn.s + inn.s.transpose()).eval();
  return inn;
}

std::optional<UpdateResult> update(const GaussianEstimate& est, const MotionModel& model,
                                   const MeasVector& z, const MeasMatrix& r) {
  const int n = est.dim();
  const MeasStateMatrix h = measurement_matrix(model);
  Innovation inn = innovation(est, model, z, r);
  auto llt = factor_innovation(inn.s);
  if (!llt) {
    return std::nullopt;
  }

  // K = P H^T S^-1, solved as S K^T = H P.
  const StateMeasMatrix pht = est.cov * h.transpose();
  const StateMeasMatrix k = llt->solve(pht.transpose()).transpose();

  UpdateResult out;
  out.posterior.mean = est.mean + k * inn.v;
  StateMatrix ikh = StateMatrix::Identity(n, n) - k * h;
  out.posterior.cov = ikh * est.cov * ikh.transpose() + k * r * k.transpose();
  symmetrize(out.posterior.cov);
  out.innovation = inn;
  return out;
}

std::optional<double> gaussian_loglik(const Innovation& inn) {
  auto llt = factor_innovation(inn.s);
  if (!llt) {
    return std::nullopt;
  }
  const double maha = llt->matrixL().solve(inn.v).squaredNorm();
  return -0.5 * (kMeasDim * kLog2Pi + log_det(*llt) + maha);
}

std::optional<double> student_t_loglik(const Innovation& inn, double nu) {
  if (!(nu > 0.0)) {
    return std::nullopt;
  }
  auto llt = factor_innovation(inn.s);
  if (!llt) {
    return std::nullopt;
  }
  const double d = kMeasDim;
  const double maha = llt->matrixL().solve(inn.v).squaredNorm();
  return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
         0.5 * d * std::log(nu * std::numbers::pi) - 0.5 * log_det(*llt) -
         0.5 * (nu + d) * std::log1p(maha / nu);
}

}  // namespace safeimm
