// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>

#include "mfpg/config.hpp"

namespace mfpg {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Aborted training (non-finite loss, missing inputs at runtime).
/// CLI exit code 3.
class RuntimeAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::string code_version;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> files;  // label -> path
  double duration_seconds = 0.0;
};

struct RunRequest {
  ExperimentConfig config;
  std::filesystem::path out_dir;
  bool force = false;
  int workers = 1;
  /// Reference run directory; when set, the summary carries
  /// delta-vs-baseline bootstrap CIs on final return and AUC.
  std::optional<std::filesystem::path> baseline_dir;
};

/// Executes train() for every seed and writes curves.csv, diagnostics.csv,
/// summary.json, manifest.json (and checkpoints when configured).
RunManifest run_experiment(const RunRequest& request);

/// One run per value of the named config axis ("section.key"); outputs are
/// placed under out_dir/<axis>=<value>/.
std::vector<RunManifest> sweep(const ExperimentConfig& base, const std::string& axis,
                               const std::vector<std::string>& values,
                               const std::filesystem::path& out_dir, bool force, int workers);

/// Runs the variance-study harness over the checkpoints saved by a previous
/// run and writes variance.csv (checkpoint step x estimator variant).
std::filesystem::path variance_report(const ExperimentConfig& config,
                                      const std::filesystem::path& checkpoint_dir,
                                      const std::filesystem::path& out_csv);

/// Recomputes summary.json for an existing run directory.
std::filesystem::path summarize(const std::filesystem::path& run_dir,
                                const std::optional<std::filesystem::path>& baseline_dir);

// Checkpoint persistence (text, exact double round-trip).
void save_checkpoint_file(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

/// Reads per-seed final returns / AUC values out of a run's summary.json.
struct SummaryMetrics {
  std::vector<double> final_returns;
  std::vector<double> aucs;
  std::vector<std::uint64_t> seeds;
};
SummaryMetrics read_summary_metrics(const std::filesystem::path& run_dir);

}  // namespace mfpg
