#include "safeimm/sim.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace safeimm {

namespace {

const Maneuver* active_maneuver(const TargetSpec& spec, double t) {
  for (const auto& m : spec.maneuvers) {
    if (t >= m.t_start && t < m.t_end) return &m;
  }
  return nullptr;
}

Eigen::Vector3d heading(const Eigen::Vector3d& v) {
  const double s = v.norm();
  return s > 0.0 ? Eigen::Vector3d(v / s) : Eigen::Vector3d::UnitX();
}

// Advances `s` by dt under the maneuver (or constant velocity) and records
// the acceleration applied over the interval on the starting state.
TruthState advance(TruthState& s, const Maneuver* m, double dt) {
  TruthState next;
  if (m == nullptr) {
    s.acc.setZero();
    next.pos = s.pos + s.vel * dt;
    next.vel = s.vel;
  } else if (m->kind == Maneuver::Kind::Longitudinal) {
    s.acc = m->accel * heading(s.vel);
    next.pos = s.pos + s.vel * dt + 0.5 * s.acc * dt * dt;
    next.vel = s.vel + s.acc * dt;
  } else {
    const double speed = std::hypot(s.vel.x(), s.vel.y());
    if (speed <= 0.0) {
      throw std::invalid_argument("lateral maneuver needs non-zero horizontal speed");
    }
    const double w = m->accel / speed;
    const double c = std::cos(w * dt);
    const double sn = std::sin(w * dt);
    const double vx = s.vel.x();
    const double vy = s.vel.y();
    s.acc = Eigen::Vector3d(-w * vy, w * vx, 0.0);
    next.pos = s.pos + Eigen::Vector3d((sn * vx - (1.0 - c) * vy) / w,
                                       ((1.0 - c) * vx + sn * vy) / w, s.vel.z() * dt);
    next.vel = Eigen::Vector3d(c * vx - sn * vy, sn * vx + c * vy, s.vel.z());
  }
  return next;
}

}  // namespace

int ScenarioConfig::steps() const {
  return static_cast<int>(std::llround(duration / dt));
}

std::vector<TargetSpec> ScenarioConfig::default_targets() {
  std::vector<TargetSpec> out;

  TargetSpec t1;
  t1.name = "T1";
  t1.position = {0.0, 0.0, 0.0};
  t1.velocity = {8.0, 0.0, 0.0};
  out.push_back(t1);

  // 90 degree left turn over t in [10, 13) s at 3 m/s^2: speed = a / omega.
  TargetSpec t2;
  t2.name = "T2";
  const double turn_rate = (std::numbers::pi / 2.0) / 3.0;
  t2.position = {0.0, 40.0, 0.0};
  t2.velocity = {3.0 / turn_rate, 0.0, 0.0};
  t2.maneuvers.push_back({Maneuver::Kind::Lateral, 10.0, 13.0, 3.0});
  out.push_back(t2);

  TargetSpec t3;
  t3.name = "T3";
  t3.position = {0.0, -40.0, 0.0};
  t3.velocity = {10.0, 0.0, 0.0};
  t3.maneuvers.push_back({Maneuver::Kind::Longitudinal, 8.0, 10.0, 6.0});
  t3.maneuvers.push_back({Maneuver::Kind::Longitudinal, 20.0, 22.0, -6.0});
  out.push_back(t3);
  return out;
}

void validate(const ScenarioConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("scenario.dt must be positive");
  if (!(cfg.duration > 0.0)) throw std::invalid_argument("scenario.duration must be positive");
  const double ratio = cfg.duration / cfg.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("scenario.duration must be an integer multiple of dt");
  }
  if (!(cfg.detection_prob > 0.0 && cfg.detection_prob <= 1.0)) {
    throw std::invalid_argument("scenario.detection_prob must lie in (0, 1]");
  }
  if (cfg.noise.sigma_pos < 0.0 || cfg.noise.sigma_vel < 0.0) {
    throw std::invalid_argument("noise sigmas must be non-negative");
  }
  if (cfg.clutter_rate < 0.0) throw std::invalid_argument("scenario.clutter_rate must be >= 0");
  if (cfg.jam_fraction < 0.0 || cfg.jam_fraction > 1.0) {
    throw std::invalid_argument("scenario.jam_fraction must lie in [0, 1]");
  }
  for (const auto& t : cfg.targets) {
    for (const auto& m : t.maneuvers) {
      if (!(m.t_end > m.t_start)) throw std::invalid_argument("maneuver needs t_end > t_start");
    }
  }
}

std::vector<TruthTrajectory> generate_truth(const ScenarioConfig& cfg) {
  validate(cfg);
  const int n = cfg.steps();
  std::vector<TruthTrajectory> out;
  out.reserve(cfg.targets.size());
  for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
    const auto& spec = cfg.targets[i];
    TruthTrajectory traj;
    traj.target_id = static_cast<int>(i);
    traj.states.resize(static_cast<std::size_t>(n));
    TruthState s;
    s.pos = spec.position;
    s.vel = spec.velocity;
    for (int k = 0; k < n; ++k) {
      const double mid = (k + 0.5) * cfg.dt;
      TruthState next = advance(s, active_maneuver(spec, mid), cfg.dt);
      traj.states[static_cast<std::size_t>(k)] = s;
      s = next;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

MeasurementSet generate_measurements(const std::vector<TruthTrajectory>& truth,
                                     const ScenarioConfig& cfg) {
  validate(cfg);
  const int n = cfg.steps();

  // Independent streams, so e.g. changing the clutter rate leaves target noise untouched.
  std::seed_seq seq{cfg.seed, std::uint64_t{0x5afe1331}};
  std::array<std::uint64_t, 4> seeds{};
  seq.generate(seeds.begin(), seeds.end());
  std::mt19937_64 jitter_rng(seeds[0]);
  std::mt19937_64 detect_rng(seeds[1]);
  std::mt19937_64 noise_rng(seeds[2]);
  std::mt19937_64 clutter_rng(seeds[3]);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (const auto& t : truth) {
    for (const auto& s : t.states) {
      lo = lo.cwiseMin(s.pos);
      hi = hi.cwiseMax(s.pos);
    }
  }
  lo.array() -= cfg.clutter_margin;
  hi.array() += cfg.clutter_margin;

  MeasurementSet out;
  out.frames.resize(static_cast<std::size_t>(n));
  out.realized = truth;
  std::vector<Eigen::Vector3d> drift(truth.size(), Eigen::Vector3d::Zero());

  for (int k = 0; k < n; ++k) {
    Frame& frame = out.frames[static_cast<std::size_t>(k)];
    frame.step = k;
    frame.time = k * cfg.dt;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      auto& real = out.realized[i].states[static_cast<std::size_t>(k)];
      real.pos += drift[i];
      const Eigen::Vector3d jitter(cfg.noise.sigma_vel * normal(jitter_rng),
                                   cfg.noise.sigma_vel * normal(jitter_rng), 0.0);
      real.vel += jitter;
      drift[i] += jitter * cfg.dt;

      const bool detected = unit(detect_rng) < cfg.detection_prob;
      const bool jammed = cfg.jamming && unit(detect_rng) < cfg.jam_fraction;
      const double sigma = cfg.noise.sigma_pos * (jammed ? cfg.jam_scale : 1.0);
      const Eigen::Vector3d noise(normal(noise_rng), normal(noise_rng), normal(noise_rng));
      if (detected) {
        frame.detections.push_back({real.pos + sigma * noise, static_cast<int>(i)});
      }
    }
    if (cfg.clutter_rate > 0.0) {
      std::poisson_distribution<int> count(cfg.clutter_rate);
      const int nc = count(clutter_rng);
      for (int c = 0; c < nc; ++c) {
        Eigen::Vector3d z;
        for (int a = 0; a < 3; ++a) z(a) = lo(a) + (hi(a) - lo(a)) * unit(clutter_rng);
        frame.detections.push_back({z, -1});
      }
    }
  }
  return out;
}

ScenarioConfig named_scenario(const std::string& name) {
  ScenarioConfig cfg;
  if (name == "profile1" || name == "default") {
    cfg.noise = {2.0, 0.01};
  } else if (name == "profile2") {
    cfg.noise = {0.01, 2.0};
  } else if (name == "high_noise") {
    cfg.noise = {0.30, 8.0};
  } else if (name == "t2_stress") {
    cfg.noise = {2.0, 0.01};
    // Same heading change as T2 but at twice the lateral acceleration, twice.
    auto& t2 = cfg.targets[1];
    const double turn_rate = (std::numbers::pi / 2.0) / 1.5;
    t2.velocity = {6.0 / turn_rate, 0.0, 0.0};
    t2.maneuvers = {{Maneuver::Kind::Lateral, 10.0, 11.5, 6.0},
                    {Maneuver::Kind::Lateral, 18.0, 19.5, -6.0}};
  } else {
    throw std::invalid_argument("unknown scenario profile '" + name + "'");
  }
  return cfg;
}

}  // namespace safeimm
