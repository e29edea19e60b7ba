#include "safeimm/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace safeimm {

namespace {

std::string where(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) return "";
  return " (line " + std::to_string(mark.line + 1) + ")";
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const char* expected) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("field '" + key + "'" + where(node) + ": expected " + expected);
  }
}

// Walks a mapping, rejecting keys it does not know.
class Section {
 public:
  Section(const YAML::Node& node, std::string prefix)
      : node_(node), prefix_(std::move(prefix)), present_(node.IsDefined() && !node.IsNull()) {
    if (present_ && !node_.IsMap()) {
      throw ConfigError("section '" + prefix_ + "'" + where(node_) + ": expected a mapping");
    }
  }

  /// Rejects any key that was never asked for.
  void finish() const {
    if (!present_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) {
        throw ConfigError("unknown field '" + path(key) + "'" + where(kv.first));
      }
    }
  }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    if (!present_) return YAML::Node(YAML::NodeType::Undefined);
    // Const lookup: a missing key must not be inserted into the document.
    const YAML::Node& map = node_;
    YAML::Node n = map[key];
    if (!n.IsDefined() || n.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    return n;
  }

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  void number(const std::string& key, double& out) {
    if (auto n = child(key)) out = scalar<double>(n, path(key), "a number");
  }
  void integer(const std::string& key, int& out) {
    if (auto n = child(key)) out = scalar<int>(n, path(key), "an integer");
  }
  void boolean(const std::string& key, bool& out) {
    if (auto n = child(key)) out = scalar<bool>(n, path(key), "true or false");
  }
  void text(const std::string& key, std::string& out) {
    if (auto n = child(key)) out = scalar<std::string>(n, path(key), "a string");
  }
  void seed(const std::string& key, std::uint64_t& out) {
    if (auto n = child(key)) out = scalar<std::uint64_t>(n, path(key), "a non-negative integer");
  }

 private:
  YAML::Node node_;
  std::string prefix_;
  bool present_;
  std::set<std::string> seen_;
};

Eigen::Vector3d vec3(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() != 3) {
    throw ConfigError("field '" + key + "'" + where(n) + ": expected a list of 3 numbers");
  }
  Eigen::Vector3d v;
  for (std::size_t i = 0; i < 3; ++i) v(static_cast<Eigen::Index>(i)) = scalar<double>(n[i], key, "a number");
  return v;
}

Eigen::MatrixXd matrix(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence() || n.size() == 0) {
    throw ConfigError("field '" + key + "'" + where(n) + ": expected a list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(n.size());
  const auto cols = static_cast<Eigen::Index>(n[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = n[static_cast<std::size_t>(r)];
    if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError("field '" + key + "'" + where(row) + ": rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = scalar<double>(row[static_cast<std::size_t>(c)], key, "a number");
    }
  }
  return m;
}

Maneuver parse_maneuver(const YAML::Node& n, const std::string& key) {
  Section s(n, key);
  Maneuver m;
  std::string kind = "longitudinal";
  s.text("kind", kind);
  if (kind == "longitudinal") {
    m.kind = Maneuver::Kind::Longitudinal;
  } else if (kind == "lateral") {
    m.kind = Maneuver::Kind::Lateral;
  } else {
    throw ConfigError("field '" + s.path("kind") + "'" + where(n) +
                      ": expected 'longitudinal' or 'lateral'");
  }
  s.number("t_start", m.t_start);
  s.number("t_end", m.t_end);
  s.number("accel", m.accel);
  s.finish();
  return m;
}

TargetSpec parse_target(const YAML::Node& n, const std::string& key) {
  Section s(n, key);
  TargetSpec t;
  s.text("name", t.name);
  if (auto p = s.child("position")) t.position = vec3(p, s.path("position"));
  if (auto v = s.child("velocity")) t.velocity = vec3(v, s.path("velocity"));
  if (auto ms = s.child("maneuvers")) {
    if (!ms.IsSequence()) throw ConfigError("field '" + s.path("maneuvers") + "': expected a list");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      t.maneuvers.push_back(parse_maneuver(ms[i], s.path("maneuvers") + "[" + std::to_string(i) + "]"));
    }
  }
  s.finish();
  return t;
}

void parse_scenario(const YAML::Node& node, RunConfig& cfg) {
  Section s(node, "scenario");
  std::string profile;
  s.text("profile", profile);
  if (!profile.empty()) {
    try {
      cfg.scenario = named_scenario(profile);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("field 'scenario.profile'" + where(s.child("profile")) + ": " + e.what());
    }
  }
  auto& sc = cfg.scenario;
  s.number("dt", sc.dt);
  s.number("duration", sc.duration);
  s.number("sigma_pos", sc.noise.sigma_pos);
  s.number("sigma_vel", sc.noise.sigma_vel);
  s.number("clutter_rate", sc.clutter_rate);
  s.boolean("jamming", sc.jamming);
  s.number("jam_fraction", sc.jam_fraction);
  s.number("jam_scale", sc.jam_scale);
  s.number("detection_prob", sc.detection_prob);
  s.number("clutter_margin", sc.clutter_margin);
  s.seed("seed", sc.seed);
  if (auto ts = s.child("targets")) {
    if (!ts.IsSequence()) throw ConfigError("field 'scenario.targets'" + where(ts) + ": expected a list");
    sc.targets.clear();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sc.targets.push_back(parse_target(ts[i], "scenario.targets[" + std::to_string(i) + "]"));
    }
  }
  s.finish();
}

void parse_tracker(const YAML::Node& node, RunConfig& cfg) {
  Section s(node, "tracker");
  std::string kind;
  s.text("kind", kind);
  if (kind == "safe_imm") cfg.tracker = TrackerKind::SafeImm;
  else if (kind == "imm_mixture_only") cfg.tracker = TrackerKind::ImmMixtureOnly;
  else if (kind == "kf_cv") cfg.tracker = TrackerKind::KfCv;
  else if (kind == "kf_ca") cfg.tracker = TrackerKind::KfCa;
  else if (!kind.empty()) {
    throw ConfigError("field 'tracker.kind'" + where(s.child("kind")) +
                      ": expected safe_imm, imm_mixture_only, kf_cv or kf_ca");
  }
  std::string lik;
  s.text("likelihood", lik);
  if (lik == "gaussian") cfg.likelihood = Likelihood::Gaussian;
  else if (lik == "student_t") cfg.likelihood = Likelihood::StudentT;
  else if (!lik.empty()) {
    throw ConfigError("field 'tracker.likelihood'" + where(s.child("likelihood")) +
                      ": expected gaussian or student_t");
  }
  s.number("nu", cfg.nu);
  s.number("nu_jam", cfg.nu_jam);
  s.number("q_cv", cfg.q_cv);
  s.number("q_ca", cfg.q_ca);
  s.number("pad_variance", cfg.gnn.imm.pad_variance);
  s.number("prob_floor", cfg.gnn.imm.prob_floor);
  if (auto m = s.child("meas_sigma")) cfg.meas_sigma = scalar<double>(m, "tracker.meas_sigma", "a number");
  s.finish();
}

void parse_gate(const YAML::Node& node, RunConfig& cfg) {
  Section s(node, "gate");
  s.number("epsilon", cfg.gate.epsilon);
  s.number("margin", cfg.gate.margin);
  s.integer("streak_len", cfg.gate.streak_len);
  s.boolean("enabled", cfg.gate.enabled);
  if (auto u = s.child("unit_scale")) cfg.gate.unit_scale = vec3(u, "gate.unit_scale");
  s.finish();
}

void parse_tpm(const YAML::Node& node, RunConfig& cfg) {
  Section s(node, "tpm");
  std::string mode;
  s.text("mode", mode);
  if (mode == "fixed") cfg.tpm.enabled = false;
  else if (mode == "adaptive") cfg.tpm.enabled = true;
  else if (!mode.empty()) {
    throw ConfigError("field 'tpm.mode'" + where(s.child("mode")) + ": expected fixed or adaptive");
  }
  if (auto pi = s.child("pi_base")) cfg.tpm.pi_base = matrix(pi, "tpm.pi_base");
  s.number("alpha_max", cfg.tpm.alpha_max);
  s.number("g_glr", cfg.tpm.g_glr);
  s.number("g_ent", cfg.tpm.g_ent);
  s.number("winner_bias", cfg.tpm.winner_bias);
  s.number("ca_boost", cfg.tpm.ca_boost);
  s.number("cv_boost", cfg.tpm.cv_boost);
  s.number("cap", cfg.tpm.cap);
  s.number("polar_mass", cfg.tpm.polar_mass);
  s.integer("window", cfg.tpm.window);
  s.finish();
}

void parse_gnn(const YAML::Node& node, RunConfig& cfg) {
  Section s(node, "gnn");
  auto& g = cfg.gnn;
  s.number("assign_threshold", g.assign_threshold);
  if (auto c = s.child("confirm")) {
    if (!c.IsSequence() || c.size() != 2) {
      throw ConfigError("field 'gnn.confirm'" + where(c) + ": expected [M, N]");
    }
    g.confirm_hits = scalar<int>(c[0], "gnn.confirm", "an integer");
    g.confirm_window = scalar<int>(c[1], "gnn.confirm", "an integer");
  }
  s.integer("max_misses", g.max_misses);
  s.number("init_velocity_variance", g.init_velocity_variance);
  s.number("init_max_speed", g.init_max_speed);
  std::string metric;
  s.text("metric", metric);
  if (metric == "mahalanobis") g.metric = CostMetric::Mahalanobis;
  else if (metric == "euclidean") g.metric = CostMetric::Euclidean;
  else if (!metric.empty()) {
    throw ConfigError("field 'gnn.metric'" + where(s.child("metric")) +
                      ": expected mahalanobis or euclidean");
  }
  std::string source;
  s.text("gate_source", source);
  if (source == "top_weight") g.gate_source = GateSource::TopWeightModel;
  else if (source == "mixture") g.gate_source = GateSource::Mixture;
  else if (!source.empty()) {
    throw ConfigError("field 'gnn.gate_source'" + where(s.child("gate_source")) +
                      ": expected top_weight or mixture");
  }
  if (auto w = s.child("init_weights")) {
    if (!w.IsSequence()) throw ConfigError("field 'gnn.init_weights'" + where(w) + ": expected a list");
    g.init_weights.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
      g.init_weights(static_cast<Eigen::Index>(i)) = scalar<double>(w[i], "gnn.init_weights", "a number");
    }
  }
  s.finish();
}

void parse_metrics(const YAML::Node& node, RunConfig& cfg) {
  Section s(node, "metrics");
  s.number("ospa_c", cfg.ospa_c);
  s.number("ospa_p", cfg.ospa_p);
  s.number("match_radius", cfg.match_radius);
  s.finish();
}

void parse_run(const YAML::Node& node, RunConfig& cfg) {
  Section s(node, "run");
  if (auto seeds = s.child("seeds")) {
    cfg.seeds.clear();
    if (seeds.IsScalar()) {
      // A bare count N means seeds 1..N.
      const int n = scalar<int>(seeds, "run.seeds", "a count or a list of seeds");
      if (n < 1) throw ConfigError("field 'run.seeds'" + where(seeds) + ": count must be >= 1");
      for (int i = 1; i <= n; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    } else if (seeds.IsSequence()) {
      for (const auto& v : seeds) cfg.seeds.push_back(scalar<std::uint64_t>(v, "run.seeds", "a seed"));
    } else {
      throw ConfigError("field 'run.seeds'" + where(seeds) + ": expected a count or a list");
    }
  }
  s.text("output_dir", cfg.output_dir);
  s.integer("threads", cfg.threads);
  s.finish();
}

void apply_override(YAML::Node& root, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + item + "': expected key=value");
  }
  const std::string key = item.substr(0, eq);
  const std::string value = item.substr(eq + 1);
  const auto& keys = known_config_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ConfigError("override '" + item + "': unknown field '" + key + "'");
  }
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + item + "': " + e.msg);
  }

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  // Nodes are handles: descending by reassignment would rebind, so recurse.
  auto set = [&](auto&& self, YAML::Node node, std::size_t i) -> void {
    if (i + 1 == parts.size()) {
      node[parts[i]] = parsed;
      return;
    }
    if (!node[parts[i]] || !node[parts[i]].IsMap()) node[parts[i]] = YAML::Node(YAML::NodeType::Map);
    self(self, node[parts[i]], i + 1);
  };
  set(set, root, 0);
}

RunConfig from_yaml(YAML::Node root, const std::vector<std::string>& overrides) {
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config" + where(root) + ": top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);

  RunConfig cfg;
  Section top(root, "");
  // Scenario first: a profile resets the scenario block.
  parse_scenario(top.child("scenario"), cfg);
  parse_tracker(top.child("tracker"), cfg);
  parse_gate(top.child("gate"), cfg);
  parse_tpm(top.child("tpm"), cfg);
  parse_gnn(top.child("gnn"), cfg);
  parse_metrics(top.child("metrics"), cfg);
  parse_run(top.child("run"), cfg);
  top.finish();
  // Without an explicit seed list, a scenario seed selects the single run.
  if (!(root["run"] && root["run"]["seeds"]) && root["scenario"] && root["scenario"]["seed"]) {
    cfg.seeds = {cfg.scenario.seed};
  }

  try {
    validate(cfg.scenario);
    validate(cfg.tpm);
    validate(make_tracker_config(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.gate.epsilon >= 0.0)) throw ConfigError("field 'gate.epsilon': must be >= 0");
  if (cfg.gate.streak_len < 0) throw ConfigError("field 'gate.streak_len': must be >= 0");
  if (!(cfg.nu > 0.0) || !(cfg.nu_jam > 0.0)) throw ConfigError("field 'tracker.nu': must be > 0");
  if (!(cfg.ospa_c > 0.0) || !(cfg.ospa_p >= 1.0)) {
    throw ConfigError("fields 'metrics.ospa_c/ospa_p': need c > 0 and p >= 1");
  }
  if (cfg.meas_sigma && !(*cfg.meas_sigma > 0.0)) {
    throw ConfigError("field 'tracker.meas_sigma': must be > 0");
  }
  if (cfg.seeds.empty()) throw ConfigError("field 'run.seeds': at least one seed is required");
  return cfg;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "scenario.profile", "scenario.dt", "scenario.duration", "scenario.sigma_pos",
      "scenario.sigma_vel", "scenario.clutter_rate", "scenario.jamming", "scenario.jam_fraction",
      "scenario.jam_scale", "scenario.detection_prob", "scenario.clutter_margin",
      "scenario.seed", "scenario.targets",
      "tracker.kind", "tracker.likelihood", "tracker.nu", "tracker.nu_jam", "tracker.q_cv",
      "tracker.q_ca", "tracker.pad_variance", "tracker.prob_floor", "tracker.meas_sigma",
      "gate.epsilon", "gate.margin", "gate.streak_len", "gate.enabled", "gate.unit_scale",
      "tpm.mode", "tpm.pi_base", "tpm.alpha_max", "tpm.g_glr", "tpm.g_ent", "tpm.winner_bias",
      "tpm.ca_boost", "tpm.cv_boost", "tpm.cap", "tpm.polar_mass", "tpm.window",
      "gnn.assign_threshold", "gnn.confirm", "gnn.max_misses", "gnn.init_velocity_variance",
      "gnn.init_max_speed", "gnn.metric", "gnn.gate_source", "gnn.init_weights",
      "metrics.ospa_c", "metrics.ospa_p", "metrics.match_radius",
      "run.seeds", "run.output_dir", "run.threads",
  };
  return keys;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error at line " + std::to_string(e.mark.line + 1) + ", column " +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  return from_yaml(root, overrides);
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path.string() + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace safeimm
