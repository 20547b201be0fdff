// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <variant>
#include <vector>

#include "mfpg/nn.hpp"

namespace mfpg {

/// One time step's exogenous policy outcome: standard-normal draws (one per
/// action dimension) for a Gaussian head, uniform(0,1) draws (one per action
/// class) for a categorical head. Immutable once drawn, and reusable across
/// environments to couple their action sampling.
struct ActionNoise {
  std::vector<double> values;
};

using Observation = std::vector<double>;
/// Continuous actions are the raw (pre-clip) samples; discrete actions are
/// a single entry holding the class index.
using Action = std::vector<double>;

/// Diagonal Gaussian head: the trunk maps an observation to
/// [mean..., log_std...]; log-std is clamped to [log_std_min, log_std_max].
struct GaussianPolicy {
  Mlp trunk;  // obs_dim -> hidden -> 2 * action_dim
  int action_dim = 0;
  double log_std_min = -5.0;
  double log_std_max = 2.0;

  static GaussianPolicy make(int obs_dim, std::vector<int> hidden, int action_dim, Rng& rng);

  /// Mean and clamped log-std at a state (plain evaluation, no graph).
  void distribution(std::span<const double> state, std::vector<double>& mean,
                    std::vector<double>& log_std) const;
};

/// Categorical head over n_actions logits; actions are drawn with the
/// Gumbel-max trick from per-class uniform outcomes.
struct CategoricalPolicy {
  Mlp trunk;  // obs_dim -> hidden -> n_actions
  int n_actions = 0;

  static CategoricalPolicy make(int obs_dim, std::vector<int> hidden, int n_actions, Rng& rng);

  /// Softmax probabilities at a state (plain evaluation).
  std::vector<double> probabilities(std::span<const double> state) const;
};

double gumbel_from_uniform(double u);

/// A stochastic policy, either family, with value semantics.
class Policy {
 public:
  explicit Policy(GaussianPolicy g) : impl_(std::move(g)) {}
  explicit Policy(CategoricalPolicy c) : impl_(std::move(c)) {}

  bool discrete() const { return std::holds_alternative<CategoricalPolicy>(impl_); }
  int obs_dim() const;
  int action_dim() const;  // 1 for categorical
  /// Entries required in one ActionNoise: action_dim (Gaussian) or
  /// n_actions (categorical).
  int noise_dim() const;

  ActionNoise draw_noise(Rng& rng) const;

  /// Deterministic transform of (parameters, state, noise) into an action.
  Action act_reparameterized(std::span<const double> state, const ActionNoise& noise) const;

  /// Gaussian: mean. Categorical: argmax of logits, ties to the lowest index.
  Action act_deterministic(std::span<const double> state) const;

  /// Differentiable log-density/log-mass of `action` at `state`, recorded on
  /// `tape` against the leaves in `vars`.
  Value log_prob(Tape& tape, const MlpVars& vars, std::span<const double> state,
                 const Action& action) const;

  /// Plain (graph-free) log-probability; same arithmetic as log_prob.
  double log_prob_value(std::span<const double> state, const Action& action) const;

  MlpVars register_on(Tape& tape) const;
  std::vector<Tensor>& parameters();
  const std::vector<Tensor>& parameters() const;
  const Mlp& trunk() const;
  std::vector<Tensor> gradients(const Tape& tape, const MlpVars& vars) const;

  const GaussianPolicy& gaussian() const { return std::get<GaussianPolicy>(impl_); }
  const CategoricalPolicy& categorical() const { return std::get<CategoricalPolicy>(impl_); }

 private:
  std::variant<GaussianPolicy, CategoricalPolicy> impl_;
};

/// State-value regressor with a linear output head.
struct ValueNetwork {
  Mlp net;  // obs_dim -> hidden -> 1

  static ValueNetwork make(int obs_dim, std::vector<int> hidden, Rng& rng);

  double predict(std::span<const double> state) const;
  Value predict_on(Tape& tape, const MlpVars& vars, std::span<const double> state) const;
};

}  // namespace mfpg
