// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "mfpg/adam.hpp"
#include "mfpg/stats.hpp"

namespace mfpg {

enum class TrainMode { kMfpg, kHfOnly, kLfOnly, kMfpgNoReparam };

struct TrainerConfig {
  TrainMode mode = TrainMode::kMfpg;
  int high_batch_transitions = 100;  // N^h, counted in transitions
  int low_multiplier = 90;           // uncorrelated low-fidelity amount, x N^h
  int lf_only_multiplier = 100;      // batch size multiplier for lf-only
  double learning_rate = 7e-4;
  double gamma = 0.97;
  double eta_ma = 0.95;
  double vf_loss_weight = 1.0;
  double max_grad_norm = 1.0;
  long budget = 200000;  // total high-fidelity transitions
  int eval_interval = 1000;
  int eval_episodes = 10;
  bool use_baseline = true;
  bool drop_negative_rho = true;
  int reconstrain_period = 0;
  std::vector<int> policy_hidden = {64, 64};
  std::vector<int> value_hidden = {64, 64};
  int checkpoint_interval = 0;  // 0 = no checkpoints
  /// Force c* to 0 while still running the full mfpg sampling path; under
  /// the stream-separated RNG this must reproduce hf-only updates exactly.
  bool force_cv_zero = false;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  long hf_steps_consumed = 0;
  double surrogate = 0.0;
  double hf_only_scalar = 0.0;
  double rho_batch = 0.0;
  double rho_ema = 0.0;
  double s_high_ema = 0.0;
  double s_low_ema = 0.0;
  double c_star = 0.0;
  bool cv_active = false;
  double vf_loss = 0.0;
};

struct TrainResult {
  std::optional<Policy> policy;
  std::optional<ValueNetwork> valuenet;
  EvalCurve curve;
  std::vector<IterationRecord> records;
  std::vector<Checkpoint> checkpoints;
  long hf_steps_consumed = 0;
  bool aborted = false;
  std::string abort_reason;
};

/// Algorithm loop: sample per mode, assemble the control-variate estimator,
/// ascend the policy with Adam under gradient clipping, fit the value
/// network on high-fidelity returns, and evaluate deterministically every
/// eval_interval high-fidelity steps — all under a strict high-fidelity step
/// budget.
TrainResult train(const TrainerConfig& config, const MultiFidelityPair& pair, std::uint64_t seed);

TrainMode parse_train_mode(const std::string& name);
std::string to_string(TrainMode mode);

}  // namespace mfpg
