// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "mfpg/env.hpp"
#include "mfpg/estimator.hpp"

namespace mfpg {

struct EvalPoint {
  long step = 0;  // high-fidelity steps consumed at evaluation time
  double mean_return = 0.0;
  std::vector<double> episode_returns;
};

/// Evaluation returns against high-fidelity steps; steps strictly increase.
struct EvalCurve {
  std::vector<EvalPoint> points;
  bool empty() const { return points.empty(); }
};

/// Runs `episodes` deterministic-policy episodes and reports the mean
/// undiscounted return plus the per-episode returns.
EvalPoint evaluate(const Policy& policy, Env& env, int episodes, Rng& rng);

/// Mean of the last min(window, size) curve values.
double final_return(const EvalCurve& curve, int window = 20);

/// Trapezoidal integral of return against the high-fidelity-step axis.
double auc(const EvalCurve& curve);

struct BootstrapResult {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int resamples = 0;
};

/// Percentile bootstrap CI for a mean; point estimate is the sample mean.
BootstrapResult bootstrap_mean_ci(std::span<const double> samples, int resamples, double level,
                                  Rng& rng);

/// Percentile bootstrap CI for mean(a) - mean(b), resampling each side
/// independently. Significance is declared when the CI excludes zero.
BootstrapResult bootstrap_diff_ci(std::span<const double> a, std::span<const double> b,
                                  int resamples, double level, Rng& rng);

/// Counts settings where the method median falls more than half the
/// reference's magnitude below the reference median (for positive
/// references this is exactly "below 50% of the reference").
int collapse_count(std::span<const double> method_medians,
                   std::span<const double> reference_medians);

double median(std::vector<double> xs);

// --- variance-study harness -------------------------------------------------

/// A policy/value snapshot taken during training.
struct Checkpoint {
  long step = 0;
  std::vector<Tensor> policy_params;
  std::vector<Tensor> value_params;
};

struct VarianceSpec {
  bool mfpg = false;           // control-variate estimator vs high-only
  int batch_transitions = 0;   // high-fidelity transitions per batch
  bool use_baseline = false;   // subtract the checkpointed state values
};

struct VarianceRow {
  long checkpoint_step = 0;
  VarianceSpec spec;
  double variance = 0.0;  // empirical variance of the batch scalar loss
  int repeats = 0;
};

struct VarianceStudyOptions {
  int repeats = 200;
  /// Batches used to pin c* and mu_low before measuring; the measured
  /// variance is that of the estimator with those held fixed.
  int pilot_batches = 50;
  int low_multiplier = 90;
  double gamma = 0.97;
};

/// For each checkpoint and estimator variant, the empirical variance of the
/// scalar loss (the batch mean of X or Z, before differentiation) over
/// `repeats` freshly sampled batches.
std::vector<VarianceRow> variance_study(std::span<const Checkpoint> checkpoints,
                                        const MultiFidelityPair& pair,
                                        std::span<const VarianceSpec> specs,
                                        const VarianceStudyOptions& options, std::uint64_t seed,
                                        const std::vector<int>& policy_hidden,
                                        const std::vector<int>& value_hidden);

/// Rebuilds a policy of the right family for `spec` from saved parameters.
Policy policy_from_params(const EnvSpec& spec, const std::vector<int>& hidden,
                          const std::vector<Tensor>& params);
ValueNetwork valuenet_from_params(const EnvSpec& spec, const std::vector<int>& hidden,
                                  const std::vector<Tensor>& params);

}  // namespace mfpg
