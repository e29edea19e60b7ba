#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "safeimm/tracker.hpp"

namespace safeimm {
namespace {

using Points = std::vector<Eigen::Vector3d>;

const Eigen::Matrix3d kR = Eigen::Matrix3d::Identity();

TEST(Tracker, EmptyFrameSpawnsNothing) {
  TrackerState st;
  const TrackerConfig cfg;
  const auto res = tracker_step(st, Points{}, 0.1, kR, cfg);
  EXPECT_EQ(res.spawned, 0);
  EXPECT_TRUE(st.tracks.empty());
}

TEST(Tracker, AllTracksMissWithoutDetections) {
  TrackerState st;
  const TrackerConfig cfg;
  tracker_step(st, Points{{0, 0, 0}, {100, 0, 0}}, 0.1, kR, cfg);
  ASSERT_EQ(st.tracks.size(), 2u);
  const auto res = tracker_step(st, Points{}, 0.1, kR, cfg);
  EXPECT_EQ(res.spawned, 0);
  EXPECT_EQ(res.assignment.unassigned_rows.size(), 2u);
  for (const auto& t : st.tracks) EXPECT_EQ(t.misses_in_row, 1);
}

TEST(Tracker, CostAtPredictionAndThreshold) {
  TrackerState st;
  const TrackerConfig cfg;
  tracker_step(st, Points{{0, 0, 0}}, 0.1, kR, cfg);
  const auto& t = st.tracks.front();
  const int w = t.bank.winner_index();
  const Eigen::Vector3d at = t.bank.estimates[static_cast<std::size_t>(w)].mean.head<3>();
  const Eigen::MatrixXd c0 = cost_matrix(st.tracks, Points{at}, kR, cfg);
  EXPECT_NEAR(c0(0, 0), 0.0, 1e-12);

  // Just inside the squared-Mahalanobis threshold along x.
  const Eigen::Matrix3d s =
      t.bank.estimates[static_cast<std::size_t>(w)].cov.topLeftCorner<3, 3>() + kR;
  const double edge = std::sqrt(cfg.assign_threshold / s.inverse()(0, 0));
  const Eigen::Vector3d inside = at + Eigen::Vector3d(edge * 0.999, 0, 0);
  const Eigen::Vector3d outside = at + Eigen::Vector3d(edge * 1.001, 0, 0);
  const Eigen::MatrixXd c2 = cost_matrix(st.tracks, Points{inside, outside}, kR, cfg);
  EXPECT_TRUE(std::isinf(c2(0, 1)));
  EXPECT_LT(c2(0, 0), cfg.assign_threshold);
}

TEST(Tracker, ExactThresholdIsForbidden) {
  TrackerConfig cfg;
  cfg.metric = CostMetric::Euclidean;
  cfg.assign_threshold = 4.0;
  TrackerState st;
  tracker_step(st, Points{{0, 0, 0}}, 0.1, kR, cfg);
  const auto& t = st.tracks.front();
  const Eigen::Vector3d at =
      t.bank.estimates[static_cast<std::size_t>(t.bank.winner_index())].mean.head<3>();
  EXPECT_TRUE(std::isinf(cost_matrix(st.tracks, Points{at + Eigen::Vector3d(2, 0, 0)}, kR, cfg)(0, 0)));
  EXPECT_NEAR(cost_matrix(st.tracks, Points{at + Eigen::Vector3d(1.5, 0, 0)}, kR, cfg)(0, 0), 2.25, 1e-12);
}

TEST(Tracker, SingleTargetConfirmsOnSecondHit) {
  TrackerState st;
  const TrackerConfig cfg;
  auto r1 = tracker_step(st, Points{{0, 0, 0}}, 0.1, kR, cfg);
  EXPECT_TRUE(r1.confirmed.empty());
  auto r2 = tracker_step(st, Points{{0.8, 0, 0}}, 0.1, kR, cfg);
  ASSERT_EQ(r2.assignment.pairs.size(), 1u);
  ASSERT_EQ(r2.confirmed.size(), 1u);
  EXPECT_EQ(r2.confirmed[0].track_id, 1u);
}

// Three well-separated noiseless targets: identity association is the oracle.
TEST(Tracker, ThreeTargetsConfirmWithStableIds) {
  TrackerState st;
  const TrackerConfig cfg;
  const Points start = {{0, 0, 0}, {0, 40, 0}, {0, -40, 0}};
  const Points vel = {{8, 0, 0}, {5, 1, 0}, {10, -2, 0}};
  std::map<int, std::uint64_t> owner;
  for (int k = 0; k < 10; ++k) {
    Points dets;
    for (int i = 0; i < 3; ++i) dets.push_back(start[i] + vel[i] * (0.1 * k));
    const auto res = tracker_step(st, dets, 0.1, kR, cfg);
    for (const auto& [ti, di] : res.assignment.pairs) {
      const auto id = st.tracks[static_cast<std::size_t>(ti)].id;
      auto [it, fresh] = owner.emplace(di, id);
      EXPECT_EQ(it->second, id) << "identity switch on target " << di;
    }
    if (k >= 1) EXPECT_EQ(res.confirmed.size(), 3u);
  }
  EXPECT_EQ(st.tracks.size(), 3u);
  EXPECT_EQ(st.next_id, 4u);
}

TEST(Tracker, DeletionAfterMissesAndNoIdReuse) {
  TrackerState st;
  const TrackerConfig cfg;
  tracker_step(st, Points{{0, 0, 0}}, 0.1, kR, cfg);
  tracker_step(st, Points{{0, 0, 0}}, 0.1, kR, cfg);
  ASSERT_EQ(st.tracks.front().status, TrackStatus::Confirmed);
  int deleted = 0;
  for (int k = 0; k < cfg.max_misses; ++k) deleted += tracker_step(st, Points{}, 0.1, kR, cfg).deleted;
  EXPECT_EQ(deleted, 1);
  EXPECT_TRUE(st.tracks.empty());
  tracker_step(st, Points{{0, 0, 0}}, 0.1, kR, cfg);
  EXPECT_EQ(st.tracks.front().id, 2u);
}

TEST(Tracker, TentativeTrackDiesWithoutConfirmation) {
  TrackerState st;
  const TrackerConfig cfg;
  tracker_step(st, Points{{0, 0, 0}}, 0.1, kR, cfg);
  for (int k = 0; k < cfg.confirm_window - 1; ++k) tracker_step(st, Points{}, 0.1, kR, cfg);
  EXPECT_TRUE(st.tracks.empty());
}

TEST(Tracker, TwoPointInitialization) {
  TrackerState st;
  const TrackerConfig cfg;
  // Second detection is far outside the first track's gate but within reach for differencing.
  tracker_step(st, Points{{0, 0, 0}}, 0.1, kR, cfg);
  tracker_step(st, Points{{0, 0, 0}, {50, 0, 0}}, 0.1, kR, cfg);
  tracker_step(st, Points{{0, 0, 0}, {50, 0, 0}, {54, 0, 0}}, 0.1, kR, cfg);
  ASSERT_GE(st.tracks.size(), 3u);
  const auto& newest = st.tracks.back();
  const auto& e = newest.bank.estimates[static_cast<std::size_t>(newest.bank.canonical_index())];
  EXPECT_NEAR(e.mean(3), 40.0, 1e-9);
  EXPECT_NEAR(e.cov(3, 3), 2.0 / 0.01, 1e-9);
}

TEST(Tracker, DeterministicReplay) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<Points> frames(40);
  for (auto& f : frames) {
    for (int i = 0; i < 6; ++i) f.emplace_back(u(rng), u(rng), 0.0);
  }
  auto run = [&] {
    TrackerState st;
    const TrackerConfig cfg;
    std::vector<std::uint64_t> ids;
    for (const auto& f : frames) {
      for (const auto& o : tracker_step(st, f, 0.1, kR, cfg).confirmed) ids.push_back(o.track_id);
    }
    return ids;
  };
  EXPECT_EQ(run(), run());
}

// Clutter-only input at low density per gate: false tracks must not persist.
TEST(Tracker, ClutterDoesNotSustainTracks) {
  const TrackerConfig cfg;
  const double side = 400.0;
  long confirmations = 0;
  long spawned = 0;
  long long_lived = 0;
  for (int seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> u(0.0, side);
    std::poisson_distribution<int> count(5.0);
    TrackerState st;
    std::set<std::uint64_t> seen;
    for (int k = 0; k < 100; ++k) {
      Points dets;
      for (int c = count(rng); c > 0; --c) dets.emplace_back(u(rng), u(rng), u(rng));
      const auto res = tracker_step(st, dets, 0.1, kR, cfg);
      spawned += res.spawned;
      for (const auto& o : res.confirmed) {
        if (seen.insert(o.track_id).second) ++confirmations;
      }
      for (const auto& t : st.tracks) {
        if (t.age > cfg.confirm_window + cfg.max_misses) ++long_lived;
      }
    }
  }
  // Chance 2-of-5 alignments do confirm occasionally; none may persist.
  EXPECT_LT(static_cast<double>(confirmations), 0.02 * static_cast<double>(spawned));
  EXPECT_EQ(long_lived, 0);
}

TEST(Tracker, ConfirmedBoundedByDistinctDetections) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  std::poisson_distribution<int> count(3.0);
  TrackerState st;
  const TrackerConfig cfg;
  std::deque<int> window;
  for (int k = 0; k < 300; ++k) {
    Points dets;
    for (int c = count(rng); c > 0; --c) dets.emplace_back(u(rng), u(rng), 0.0);
    window.push_back(static_cast<int>(dets.size()));
    if (static_cast<int>(window.size()) > cfg.confirm_window) window.pop_front();
    const int seen = std::accumulate(window.begin(), window.end(), 0);
    const auto res = tracker_step(st, dets, 0.1, kR, cfg);
    EXPECT_LE(static_cast<int>(res.confirmed.size()), seen);
  }
}

TEST(Tracker, ValidateConfig) {
  TrackerConfig cfg;
  cfg.confirm_hits = 6;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.assign_threshold = 0.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.models.clear();
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace safeimm
