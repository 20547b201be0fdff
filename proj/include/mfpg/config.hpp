// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mfpg/env.hpp"
#include "mfpg/trainer.hpp"

namespace mfpg {

/// Configuration problem: bad file, bad key, bad value. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat view of an INI-style config file: "[section]" headers and
/// "key = value" lines, '#' or ';' comments. Keys are stored as
/// "section.key"; key paths may themselves contain dots ("high.friction_mult").
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

enum class EnvFamily { kPointMass, kSlipChain };

struct EnvConfig {
  EnvFamily family = EnvFamily::kPointMass;
  PointMassConfig point_mass_high;
  PointMassConfig point_mass_low;
  SlipChainConfig slip_chain_high;
  SlipChainConfig slip_chain_low;
  bool negated_low_reward = false;
};

struct RunConfig {
  std::vector<std::uint64_t> seeds = {3, 4, 5};
  int bootstrap_resamples = 10000;
  double bootstrap_level = 0.95;
};

struct VarianceStudyConfig {
  std::vector<int> batch_sizes = {100};
  int repeats = 200;
  int pilot_batches = 50;
  bool with_baseline = true;
  bool without_baseline = true;
};

struct ExperimentConfig {
  EnvConfig env;
  TrainerConfig trainer;
  RunConfig run;
  VarianceStudyConfig variance;

  /// Stable content hash over the canonical key/value map.
  std::uint64_t hash() const;
  ConfigMap to_map() const;
};

/// Parses and validates; throws ConfigError naming the offending field path.
ExperimentConfig experiment_config_from_map(const ConfigMap& map);
ExperimentConfig load_experiment_config(const std::string& path);

/// The config keys accepted by the grammar (also the valid sweep axes).
std::vector<std::string> known_config_keys();

/// Builds the high/low environment pair, applying the negated-reward wrapper
/// to the low side when configured.
MultiFidelityPair build_pair(const EnvConfig& env);

std::uint64_t hash_config_map(const ConfigMap& map);

}  // namespace mfpg
