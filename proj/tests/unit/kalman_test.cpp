#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "safeimm/kalman.hpp"
#include "support/random.hpp"

namespace safeimm {
namespace {

using testing::random_estimate;
using testing::random_pd;

// Direct density via an explicit inverse and determinant.
double dense_gaussian(const Eigen::Vector3d& v, const Eigen::Matrix3d& s) {
  const double d2 = v.dot(s.inverse() * v);
  return -0.5 * (3.0 * std::log(2.0 * std::numbers::pi) + std::log(s.determinant()) + d2);
}

Innovation make_innovation(const Eigen::Vector3d& v, const Eigen::Matrix3d& s) {
  Innovation inn;
  inn.v = v;
  inn.s = s;
  return inn;
}

TEST(Kalman, PredictKinematics) {
  GaussianEstimate e;
  e.mean = StateVector::Zero(6);
  e.mean(3) = 1.0;
  e.cov = StateMatrix::Identity(6, 6);
  const auto p = predict(e, MotionModel::cv(), 0.1);
  EXPECT_NEAR(p.mean(0), 0.1, 1e-15);
  EXPECT_GT(p.cov.trace(), e.cov.trace());

  GaussianEstimate zero = e;
  zero.mean.setZero();
  EXPECT_TRUE(predict(zero, MotionModel::cv(), 1e-9).mean.isZero());
}

TEST(Kalman, UpdateAtPredictedMeasurement) {
  std::mt19937_64 rng(1);
  const auto e = random_estimate(rng, 9);
  const auto m = MotionModel::ca();
  const Eigen::Vector3d z = e.mean.head(3);
  const auto r = update(e, m, z, Eigen::Matrix3d::Identity());
  ASSERT_TRUE(r);
  EXPECT_LT(r->innovation.v.norm(), 1e-15);
  EXPECT_LT((r->posterior.mean - e.mean).norm(), 1e-12);
}

TEST(Kalman, ScalarIdentityPerAxis) {
  const double p = 3.0;
  const double rv = 0.5;
  GaussianEstimate e;
  e.mean = StateVector::Zero(6);
  e.cov = StateMatrix::Identity(6, 6) * p;
  const auto r = update(e, MotionModel::cv(), Eigen::Vector3d(1, 2, 3),
                        Eigen::Matrix3d::Identity() * rv);
  ASSERT_TRUE(r);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r->posterior.cov(i, i), p * rv / (p + rv), 1e-12);
}

// Information form: P⁺ = (P⁻¹ + HᵀR⁻¹H)⁻¹, μ⁺ = P⁺(P⁻¹μ + HᵀR⁻¹z).
TEST(Kalman, MatchesInformationFilter) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 2000; ++i) {
    const auto m = (i % 2) ? MotionModel::ca() : MotionModel::cv();
    const int n = m.state_dim();
    GaussianEstimate e = random_estimate(rng, n);
    e.cov = random_pd(rng, n, 0.5);
    const Eigen::Matrix3d r = random_pd(rng, 3, 0.5);
    const Eigen::Vector3d z = testing::random_matrix(rng, 3, 1);
    const auto got = update(e, m, z, r);
    ASSERT_TRUE(got);

    const Eigen::MatrixXd h = measurement_matrix(m);
    const Eigen::MatrixXd pinv = e.cov.inverse();
    const Eigen::MatrixXd info = pinv + h.transpose() * r.inverse() * h;
    const Eigen::MatrixXd cov = info.inverse();
    const Eigen::VectorXd mean = cov * (pinv * e.mean + h.transpose() * r.inverse() * z);

    EXPECT_LT((got->posterior.cov - cov).norm(), 1e-8 * cov.norm());
    EXPECT_LT((got->posterior.mean - mean).norm(), 1e-8 * (1.0 + mean.norm()));
  }
}

TEST(Kalman, PosteriorShrinksPositionBlock) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto m = MotionModel::ca();
    const auto e = random_estimate(rng, 9);
    const auto r = update(e, m, Eigen::Vector3d::Zero(), random_pd(rng, 3));
    ASSERT_TRUE(r);
    const Eigen::Matrix3d diff = e.cov.topLeftCorner(3, 3) - r->posterior.cov.topLeftCorner(3, 3);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(diff);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * e.cov.topLeftCorner(3, 3).trace());
  }
}

TEST(Kalman, JosephKeepsPsdUnderFuzz) {
  std::mt19937_64 rng(5);
  long bad = 0;
  constexpr int kCases = 1'000'000;
  for (int i = 0; i < kCases; ++i) {
    const auto m = (i % 2) ? MotionModel::ca() : MotionModel::cv();
    const auto e = random_estimate(rng, m.state_dim(), 1.0);
    const auto r = update(e, m, Eigen::Vector3d::Zero(), random_pd(rng, 3));
    if (!r || !is_psd(r->posterior.cov)) ++bad;
  }
  EXPECT_EQ(bad, 0);
}

TEST(Kalman, SingularInnovationIsRejected) {
  GaussianEstimate e;
  e.mean = StateVector::Zero(6);
  e.cov = StateMatrix::Zero(6, 6);
  EXPECT_FALSE(update(e, MotionModel::cv(), Eigen::Vector3d::Ones(), Eigen::Matrix3d::Zero()));
}

TEST(Kalman, GaussianLoglikClosedForms) {
  const auto at0 = gaussian_loglik(make_innovation(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()));
  ASSERT_TRUE(at0);
  EXPECT_NEAR(*at0, -1.5 * std::log(2.0 * std::numbers::pi), 1e-14);
  const auto at4 = gaussian_loglik(make_innovation(Eigen::Vector3d::Zero(), 4.0 * Eigen::Matrix3d::Identity()));
  EXPECT_NEAR(*at0 - *at4, 1.5 * std::log(4.0), 1e-13);
}

TEST(Kalman, GaussianLoglikMatchesDenseOracle) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Matrix3d s = random_pd(rng, 3, 0.1);
    const Eigen::Vector3d v = testing::random_matrix(rng, 3, 1);
    const auto got = gaussian_loglik(make_innovation(v, s));
    ASSERT_TRUE(got);
    const double want = dense_gaussian(v, s);
    EXPECT_NEAR(*got, want, 1e-9 * (1.0 + std::abs(want)));
    // Maximized at v = 0 for fixed S.
    EXPECT_LE(*got, *gaussian_loglik(make_innovation(Eigen::Vector3d::Zero(), s)));
  }
}

TEST(Kalman, StudentTConstantAtZero) {
  std::mt19937_64 rng(8);
  for (double nu : {1.0, 2.0, 2.5, 5.0, 30.0}) {
    const Eigen::Matrix3d s = random_pd(rng, 3);
    const auto inn = make_innovation(Eigen::Vector3d::Zero(), s);
    const double want = std::lgamma((nu + 3.0) / 2.0) - std::lgamma(nu / 2.0) - 1.5 * std::log(nu / 2.0);
    EXPECT_NEAR(*student_t_loglik(inn, nu) - *gaussian_loglik(inn), want, 1e-12) << nu;
  }
}

TEST(Kalman, StudentTHeavyTailCrossover) {
  const Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  // Find the crossover radius numerically, then check the ordering on both sides.
  double lo = 0.0;
  double hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const auto inn = make_innovation(Eigen::Vector3d(mid, 0, 0), s);
    (*student_t_loglik(inn, 5.0) > *gaussian_loglik(inn) ? hi : lo) = mid;
  }
  ASSERT_GT(hi, 0.5);
  ASSERT_LT(hi, 10.0);
  for (double r : {hi * 1.01, hi * 2.0, hi * 10.0}) {
    const auto inn = make_innovation(Eigen::Vector3d(0, r, 0), s);
    EXPECT_GT(*student_t_loglik(inn, 5.0), *gaussian_loglik(inn));
  }
}

TEST(Kalman, StudentTLimitAndMonotone) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d s = random_pd(rng, 3, 0.1);
    const Eigen::Vector3d v = testing::random_matrix(rng, 3, 1);
    const auto inn = make_innovation(v, s);
    // Leading correction is (d⁴ − 6d² + c)/(4ν).
    const double d2 = *inn.mahalanobis2();
    EXPECT_LT(std::abs(*student_t_loglik(inn, 1e6) - *gaussian_loglik(inn)),
              (d2 * d2 + 6.0 * d2 + 10.0) / 1e6);
    const auto further = make_innovation(1.5 * v, s);
    EXPECT_LT(*student_t_loglik(further, 5.0), *student_t_loglik(inn, 5.0));
  }
}

TEST(Kalman, PsdCheck) {
  EXPECT_TRUE(is_psd(StateMatrix::Identity(6, 6)));
  StateMatrix bad = StateMatrix::Identity(6, 6);
  bad(0, 0) = -1.0;
  EXPECT_FALSE(is_psd(bad));
  StateMatrix asym = StateMatrix::Identity(6, 6);
  asym(0, 1) = 0.1;
  EXPECT_FALSE(is_psd(asym));
}

}  // namespace
}  // namespace safeimm
