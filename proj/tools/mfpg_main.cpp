// SPDX-License-Identifier: Apache-2.0
//
// Experiment front-end: seeded runs, config sweeps, variance reports and
// summaries. Exit codes: 0 success, 2 config error, 3 runtime abort.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mfpg/runner.hpp"

namespace {

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

mfpg::ExperimentConfig load_config_with_overrides(const std::string& path,
                                                  const std::string& seeds_override) {
  mfpg::ConfigMap map = mfpg::parse_config_file(path);
  if (!seeds_override.empty()) map["run.seeds"] = seeds_override;
  return mfpg::experiment_config_from_map(map);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfpg: multi-fidelity policy-gradient experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds, baseline, axis, values, checkpoints, run_dir;
  bool force = false;
  int workers = 1;

  CLI::App* cmd_run = app.add_subcommand("run", "train every seed of a config and write artifacts");
  cmd_run->add_option("--config", config_path, "config file")->required();
  cmd_run->add_option("--out", out_dir, "output directory")->required();
  cmd_run->add_option("--seeds", seeds, "comma-separated seed override");
  cmd_run->add_option("--baseline", baseline, "baseline run directory for delta CIs");
  cmd_run->add_option("--workers", workers, "parallel per-seed workers");
  cmd_run->add_flag("--force", force, "allow writing into a non-empty directory");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "one run per value of a config axis");
  cmd_sweep->add_option("--config", config_path, "base config file")->required();
  cmd_sweep->add_option("--axis", axis, "config key to vary, e.g. trainer.eta_ma")->required();
  cmd_sweep->add_option("--values", values, "comma-separated values")->required();
  cmd_sweep->add_option("--out", out_dir, "output directory")->required();
  cmd_sweep->add_option("--seeds", seeds, "comma-separated seed override");
  cmd_sweep->add_option("--workers", workers, "parallel per-seed workers");
  cmd_sweep->add_flag("--force", force, "allow writing into a non-empty directory");

  CLI::App* cmd_var = app.add_subcommand("variance-report",
                                         "variance of estimator variants at saved checkpoints");
  cmd_var->add_option("--config", config_path, "config file")->required();
  cmd_var->add_option("--checkpoints", checkpoints, "checkpoint directory from a run")->required();
  cmd_var->add_option("--out", out_dir, "output CSV path")->required();

  CLI::App* cmd_sum = app.add_subcommand("summarize", "recompute summary statistics for a run");
  cmd_sum->add_option("--run", run_dir, "run directory")->required();
  cmd_sum->add_option("--baseline", baseline, "baseline run directory for delta CIs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      mfpg::RunRequest req;
      req.config = load_config_with_overrides(config_path, seeds);
      req.out_dir = out_dir;
      req.force = force;
      req.workers = workers;
      if (!baseline.empty()) req.baseline_dir = baseline;
      mfpg::RunManifest m = mfpg::run_experiment(req);
      std::printf("wrote %zu files to %s (%.1fs)\n", m.files.size(), out_dir.c_str(),
                  m.duration_seconds);
    } else if (cmd_sweep->parsed()) {
      mfpg::ExperimentConfig base = load_config_with_overrides(config_path, seeds);
      auto manifests = mfpg::sweep(base, axis, split_values(values), out_dir, force, workers);
      std::printf("swept %s over %zu values into %s\n", axis.c_str(), manifests.size(),
                  out_dir.c_str());
    } else if (cmd_var->parsed()) {
      mfpg::ExperimentConfig cfg = load_config_with_overrides(config_path, "");
      auto path = mfpg::variance_report(cfg, checkpoints, out_dir);
      std::printf("wrote %s\n", path.string().c_str());
    } else if (cmd_sum->parsed()) {
      std::optional<std::filesystem::path> base;
      if (!baseline.empty()) base = baseline;
      auto path = mfpg::summarize(run_dir, base);
      std::printf("wrote %s\n", path.string().c_str());
    }
  } catch (const mfpg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
