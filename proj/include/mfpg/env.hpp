// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "mfpg/policy.hpp"
#include "mfpg/rng.hpp"

namespace mfpg {

struct ActionSpace {
  bool discrete = false;
  int n = 0;                 // classes, when discrete
  std::vector<double> low;   // box bounds, when continuous
  std::vector<double> high;

  int dim() const { return discrete ? 1 : static_cast<int>(low.size()); }
  bool operator==(const ActionSpace&) const = default;
};

struct EnvSpec {
  int obs_dim = 0;
  ActionSpace action;
  int horizon = 0;       // T >= 1
  double gamma = 1.0;    // in [0, 1]

  bool operator==(const EnvSpec&) const = default;
};

struct StepResult {
  Observation next_state;
  double reward = 0.0;
  bool done = false;
};

/// Episodic environment with reset-to-state support. Stepping past the
/// horizon is a usage error; a `done` caused by goal arrival before the
/// horizon leaves the environment steppable (absorbing), which lets coupled
/// rollouts be driven to a matched length.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Observation reset(Rng& rng) = 0;
  virtual void reset_to_state(const Observation& state) = 0;
  virtual StepResult step(const Action& action, Rng& rng) = 0;
  virtual Observation observe() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

/// 1-D point mass with actuator-gain ("gravity") and damping ("friction")
/// multipliers as the fidelity knobs:
///   v' = v + (a * gravity_mult - friction_mult * 0.5 * v) * dt + noise
///   x' = x + v' * dt
///   r  = -(x' - goal)^2 - 0.01 * a^2
/// Actions are clipped to [-1, 1] before use; states are clipped to a box so
/// rewards stay bounded.
struct PointMassConfig {
  double friction_mult = 1.0;
  double gravity_mult = 1.0;
  double dt = 0.1;
  double process_noise_std = 0.01;
  double goal_position = 1.0;
  double init_half_width = 0.1;  // x0 ~ U(-w, w), v0 = 0
  double x_bound = 3.0;
  double v_bound = 3.0;
  int horizon = 50;
  double gamma = 0.97;
};

class PointMassEnv final : public Env {
 public:
  explicit PointMassEnv(const PointMassConfig& cfg);
  const EnvSpec& spec() const override { return spec_; }
  const PointMassConfig& config() const { return cfg_; }
  Observation reset(Rng& rng) override;
  void reset_to_state(const Observation& state) override;
  StepResult step(const Action& action, Rng& rng) override;
  Observation observe() const override { return {x_, v_}; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<PointMassEnv>(*this); }

 private:
  PointMassConfig cfg_;
  EnvSpec spec_;
  double x_ = 0.0;
  double v_ = 0.0;
  int t_ = 0;
  bool live_ = false;
};

/// Discrete chain: states 0..n-1, start at 0, two actions (towards/away from
/// the goal end). The intended move executes with probability 1 - slip_prob
/// and is reversed otherwise; reaching the goal pays reward 1 and the goal is
/// absorbing afterwards. Small instances admit exhaustive outcome
/// enumeration, which the test oracles rely on.
struct SlipChainConfig {
  int n_states = 3;
  double slip_prob = 0.1;
  int goal = 2;
  int horizon = 20;
  double gamma = 0.97;
};

class SlipChainEnv final : public Env {
 public:
  explicit SlipChainEnv(const SlipChainConfig& cfg);
  const EnvSpec& spec() const override { return spec_; }
  const SlipChainConfig& config() const { return cfg_; }
  Observation reset(Rng& rng) override;
  void reset_to_state(const Observation& state) override;
  StepResult step(const Action& action, Rng& rng) override;
  Observation observe() const override { return {static_cast<double>(idx_)}; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<SlipChainEnv>(*this); }

 private:
  SlipChainConfig cfg_;
  EnvSpec spec_;
  int idx_ = 0;
  int t_ = 0;
  bool live_ = false;
};

/// Identical dynamics, reward negated stepwise.
std::unique_ptr<Env> negate_reward_wrapper(std::unique_ptr<Env> inner);

/// High- and low-fidelity instances over identical observation/action
/// spaces, horizon and discount; the low side must accept reset_to_state for
/// any state the high side can emit.
struct MultiFidelityPair {
  std::unique_ptr<Env> high;
  std::unique_ptr<Env> low;

  static MultiFidelityPair make(std::unique_ptr<Env> high, std::unique_ptr<Env> low);
  MultiFidelityPair clone() const { return {high->clone(), low->clone()}; }
};

}  // namespace mfpg
