// SPDX-License-Identifier: Apache-2.0
#include "mfpg/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace mfpg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any [section]");
    }
    const std::string path = section + "." + key;
    if (map.count(path)) throw ConfigError("duplicate config key '" + path + "'");
    map[path] = value;
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

class FieldReader {
 public:
  explicit FieldReader(const ConfigMap& map) : map_(map) {}

  bool has(const std::string& key) const { return map_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
  }

  double real(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a real number, got '" + it->second + "'");
    }
  }

  long integer(const std::string& key, long fallback) {
    used_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const long v = std::stol(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected an integer, got '" + it->second + "'");
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    used_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError(key + ": expected true|false, got '" + it->second + "'");
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) {
    used_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    std::vector<int> out;
    if (trim(it->second).empty()) return out;
    for (const std::string& part : split(it->second, ',')) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stoi(part, &pos));
        if (pos != part.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError(key + ": expected a comma-separated integer list, got '" + it->second +
                          "'");
      }
    }
    return out;
  }

  std::vector<std::uint64_t> seed_list(const std::string& key,
                                       std::vector<std::uint64_t> fallback) {
    used_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    std::vector<std::uint64_t> out;
    for (const std::string& part : split(it->second, ',')) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stoull(part, &pos));
        if (pos != part.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ConfigError(key + ": expected a comma-separated seed list, got '" + it->second +
                          "'");
      }
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : map_) {
      (void)value;
      if (!used_.count(key)) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  }

 private:
  const ConfigMap& map_;
  std::set<std::string> used_;
};

void read_point_mass(FieldReader& r, const std::string& prefix, PointMassConfig& cfg) {
  cfg.friction_mult = r.real("env." + prefix + ".friction_mult", cfg.friction_mult);
  cfg.gravity_mult = r.real("env." + prefix + ".gravity_mult", cfg.gravity_mult);
}

}  // namespace

std::vector<std::string> known_config_keys() {
  return {
      "env.family",
      "env.horizon",
      "env.gamma",
      "env.dt",
      "env.process_noise_std",
      "env.goal_position",
      "env.init_half_width",
      "env.high.friction_mult",
      "env.high.gravity_mult",
      "env.low.friction_mult",
      "env.low.gravity_mult",
      "env.n_states",
      "env.goal",
      "env.high.slip_prob",
      "env.low.slip_prob",
      "env.negated_low_reward",
      "trainer.mode",
      "trainer.high_batch_transitions",
      "trainer.low_multiplier",
      "trainer.lf_only_multiplier",
      "trainer.learning_rate",
      "trainer.eta_ma",
      "trainer.vf_loss_weight",
      "trainer.max_grad_norm",
      "trainer.budget",
      "trainer.use_baseline",
      "trainer.drop_negative_rho",
      "trainer.reconstrain_period",
      "trainer.use_reparameterization",
      "trainer.policy_hidden",
      "trainer.value_hidden",
      "trainer.eval_interval",
      "trainer.eval_episodes",
      "trainer.checkpoint_interval",
      "run.seeds",
      "run.bootstrap_resamples",
      "run.bootstrap_level",
      "variance_study.batch_sizes",
      "variance_study.repeats",
      "variance_study.pilot_batches",
      "variance_study.with_baseline",
      "variance_study.without_baseline",
  };
}

ExperimentConfig experiment_config_from_map(const ConfigMap& map) {
  FieldReader r(map);
  ExperimentConfig cfg;

  // [env]
  const std::string family = r.str("env.family", "point_mass");
  if (family == "point_mass") {
    cfg.env.family = EnvFamily::kPointMass;
  } else if (family == "slip_chain") {
    cfg.env.family = EnvFamily::kSlipChain;
  } else {
    throw ConfigError("env.family: unknown value '" + family +
                      "' (expected point_mass|slip_chain)");
  }
  const double gamma = r.real("env.gamma", 0.97);
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("env.gamma: outside [0, 1]");

  PointMassConfig pm;
  pm.gamma = gamma;
  pm.horizon = static_cast<int>(r.integer("env.horizon", cfg.env.family == EnvFamily::kPointMass
                                                             ? pm.horizon
                                                             : SlipChainConfig{}.horizon));
  if (pm.horizon < 1) throw ConfigError("env.horizon: must be >= 1");
  pm.dt = r.real("env.dt", pm.dt);
  pm.process_noise_std = r.real("env.process_noise_std", pm.process_noise_std);
  pm.goal_position = r.real("env.goal_position", pm.goal_position);
  pm.init_half_width = r.real("env.init_half_width", pm.init_half_width);
  cfg.env.point_mass_high = pm;
  cfg.env.point_mass_low = pm;
  read_point_mass(r, "high", cfg.env.point_mass_high);
  read_point_mass(r, "low", cfg.env.point_mass_low);

  SlipChainConfig sc;
  sc.gamma = gamma;
  sc.horizon = pm.horizon;
  sc.n_states = static_cast<int>(r.integer("env.n_states", sc.n_states));
  sc.goal = static_cast<int>(r.integer("env.goal", sc.n_states - 1));
  cfg.env.slip_chain_high = sc;
  cfg.env.slip_chain_low = sc;
  cfg.env.slip_chain_high.slip_prob = r.real("env.high.slip_prob", sc.slip_prob);
  cfg.env.slip_chain_low.slip_prob = r.real("env.low.slip_prob", sc.slip_prob);
  cfg.env.negated_low_reward = r.boolean("env.negated_low_reward", false);

  // [trainer]
  TrainerConfig& t = cfg.trainer;
  try {
    t.mode = parse_train_mode(r.str("trainer.mode", "mfpg"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("trainer.mode: ") + e.what());
  }
  t.gamma = gamma;
  t.high_batch_transitions = static_cast<int>(
      r.integer("trainer.high_batch_transitions", t.high_batch_transitions));
  t.low_multiplier = static_cast<int>(r.integer("trainer.low_multiplier", t.low_multiplier));
  t.lf_only_multiplier =
      static_cast<int>(r.integer("trainer.lf_only_multiplier", t.lf_only_multiplier));
  t.learning_rate = r.real("trainer.learning_rate", t.learning_rate);
  t.eta_ma = r.real("trainer.eta_ma", t.eta_ma);
  t.vf_loss_weight = r.real("trainer.vf_loss_weight", t.vf_loss_weight);
  t.max_grad_norm = r.real("trainer.max_grad_norm", t.max_grad_norm);
  t.budget = r.integer("trainer.budget", t.budget);
  t.use_baseline = r.boolean("trainer.use_baseline", t.use_baseline);
  t.drop_negative_rho = r.boolean("trainer.drop_negative_rho", t.drop_negative_rho);
  t.reconstrain_period =
      static_cast<int>(r.integer("trainer.reconstrain_period", t.reconstrain_period));
  t.policy_hidden = r.int_list("trainer.policy_hidden", t.policy_hidden);
  t.value_hidden = r.int_list("trainer.value_hidden", t.value_hidden);
  t.eval_interval = static_cast<int>(r.integer("trainer.eval_interval", t.eval_interval));
  t.eval_episodes = static_cast<int>(r.integer("trainer.eval_episodes", t.eval_episodes));
  t.checkpoint_interval =
      static_cast<int>(r.integer("trainer.checkpoint_interval", t.checkpoint_interval));
  const bool reparam = r.boolean("trainer.use_reparameterization", true);
  if (!reparam && t.mode == TrainMode::kMfpg) t.mode = TrainMode::kMfpgNoReparam;

  // Negated-reward mode trains plain REINFORCE and must keep negative
  // correlation usable, so the baseline and the drop rule are forced off.
  if (cfg.env.negated_low_reward) {
    t.use_baseline = false;
    t.drop_negative_rho = false;
  }

  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("trainer: ") + e.what());
  }

  // [run]
  cfg.run.seeds = r.seed_list("run.seeds", cfg.run.seeds);
  if (cfg.run.seeds.empty()) throw ConfigError("run.seeds: seed list must be nonempty");
  std::set<std::uint64_t> distinct(cfg.run.seeds.begin(), cfg.run.seeds.end());
  if (distinct.size() != cfg.run.seeds.size()) {
    throw ConfigError("run.seeds: seeds must be distinct");
  }
  cfg.run.bootstrap_resamples =
      static_cast<int>(r.integer("run.bootstrap_resamples", cfg.run.bootstrap_resamples));
  cfg.run.bootstrap_level = r.real("run.bootstrap_level", cfg.run.bootstrap_level);
  if (cfg.run.bootstrap_resamples < 1) throw ConfigError("run.bootstrap_resamples: must be >= 1");
  if (!(cfg.run.bootstrap_level > 0.0 && cfg.run.bootstrap_level < 1.0)) {
    throw ConfigError("run.bootstrap_level: outside (0, 1)");
  }

  // [variance_study]
  cfg.variance.batch_sizes = r.int_list("variance_study.batch_sizes", cfg.variance.batch_sizes);
  cfg.variance.repeats = static_cast<int>(r.integer("variance_study.repeats", cfg.variance.repeats));
  cfg.variance.pilot_batches =
      static_cast<int>(r.integer("variance_study.pilot_batches", cfg.variance.pilot_batches));
  cfg.variance.with_baseline = r.boolean("variance_study.with_baseline", true);
  cfg.variance.without_baseline = r.boolean("variance_study.without_baseline", true);

  r.reject_unknown();

  if (cfg.env.family == EnvFamily::kSlipChain) {
    if (sc.n_states < 3) throw ConfigError("env.n_states: must be >= 3");
    if (sc.goal < 0 || sc.goal >= sc.n_states) throw ConfigError("env.goal: outside the chain");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_map(parse_config_file(path));
}

MultiFidelityPair build_pair(const EnvConfig& env) {
  std::unique_ptr<Env> high, low;
  if (env.family == EnvFamily::kPointMass) {
    high = std::make_unique<PointMassEnv>(env.point_mass_high);
    low = std::make_unique<PointMassEnv>(env.point_mass_low);
  } else {
    high = std::make_unique<SlipChainEnv>(env.slip_chain_high);
    low = std::make_unique<SlipChainEnv>(env.slip_chain_low);
  }
  if (env.negated_low_reward) low = negate_reward_wrapper(std::move(low));
  return MultiFidelityPair::make(std::move(high), std::move(low));
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_int_list(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

}  // namespace

ConfigMap ExperimentConfig::to_map() const {
  ConfigMap m;
  m["env.family"] = env.family == EnvFamily::kPointMass ? "point_mass" : "slip_chain";
  const bool pm = env.family == EnvFamily::kPointMass;
  m["env.horizon"] = std::to_string(pm ? env.point_mass_high.horizon : env.slip_chain_high.horizon);
  m["env.gamma"] = format_double(trainer.gamma);
  if (pm) {
    m["env.dt"] = format_double(env.point_mass_high.dt);
    m["env.process_noise_std"] = format_double(env.point_mass_high.process_noise_std);
    m["env.goal_position"] = format_double(env.point_mass_high.goal_position);
    m["env.init_half_width"] = format_double(env.point_mass_high.init_half_width);
    m["env.high.friction_mult"] = format_double(env.point_mass_high.friction_mult);
    m["env.high.gravity_mult"] = format_double(env.point_mass_high.gravity_mult);
    m["env.low.friction_mult"] = format_double(env.point_mass_low.friction_mult);
    m["env.low.gravity_mult"] = format_double(env.point_mass_low.gravity_mult);
  } else {
    m["env.n_states"] = std::to_string(env.slip_chain_high.n_states);
    m["env.goal"] = std::to_string(env.slip_chain_high.goal);
    m["env.high.slip_prob"] = format_double(env.slip_chain_high.slip_prob);
    m["env.low.slip_prob"] = format_double(env.slip_chain_low.slip_prob);
  }
  m["env.negated_low_reward"] = env.negated_low_reward ? "true" : "false";
  m["trainer.mode"] = to_string(trainer.mode);
  m["trainer.high_batch_transitions"] = std::to_string(trainer.high_batch_transitions);
  m["trainer.low_multiplier"] = std::to_string(trainer.low_multiplier);
  m["trainer.lf_only_multiplier"] = std::to_string(trainer.lf_only_multiplier);
  m["trainer.learning_rate"] = format_double(trainer.learning_rate);
  m["trainer.eta_ma"] = format_double(trainer.eta_ma);
  m["trainer.vf_loss_weight"] = format_double(trainer.vf_loss_weight);
  m["trainer.max_grad_norm"] = format_double(trainer.max_grad_norm);
  m["trainer.budget"] = std::to_string(trainer.budget);
  m["trainer.use_baseline"] = trainer.use_baseline ? "true" : "false";
  m["trainer.drop_negative_rho"] = trainer.drop_negative_rho ? "true" : "false";
  m["trainer.reconstrain_period"] = std::to_string(trainer.reconstrain_period);
  m["trainer.policy_hidden"] = format_int_list(trainer.policy_hidden);
  m["trainer.value_hidden"] = format_int_list(trainer.value_hidden);
  m["trainer.eval_interval"] = std::to_string(trainer.eval_interval);
  m["trainer.eval_episodes"] = std::to_string(trainer.eval_episodes);
  m["trainer.checkpoint_interval"] = std::to_string(trainer.checkpoint_interval);
  std::string seeds;
  for (std::size_t i = 0; i < run.seeds.size(); ++i) {
    if (i) seeds += ",";
    seeds += std::to_string(run.seeds[i]);
  }
  m["run.seeds"] = seeds;
  m["run.bootstrap_resamples"] = std::to_string(run.bootstrap_resamples);
  m["run.bootstrap_level"] = format_double(run.bootstrap_level);
  m["variance_study.batch_sizes"] = format_int_list(variance.batch_sizes);
  m["variance_study.repeats"] = std::to_string(variance.repeats);
  m["variance_study.pilot_batches"] = std::to_string(variance.pilot_batches);
  m["variance_study.with_baseline"] = variance.with_baseline ? "true" : "false";
  m["variance_study.without_baseline"] = variance.without_baseline ? "true" : "false";
  return m;
}

std::uint64_t hash_config_map(const ConfigMap& map) {
  // FNV-1a over "key=value\n" in map order (already sorted).
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : map) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  return h;
}

std::uint64_t ExperimentConfig::hash() const { return hash_config_map(to_map()); }

}  // namespace mfpg
