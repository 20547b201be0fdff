// SPDX-License-Identifier: Apache-2.0
#include "mfpg/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfpg {

PointMassEnv::PointMassEnv(const PointMassConfig& cfg) : cfg_(cfg) {
  if (!(cfg.friction_mult > 0.0) || !(cfg.gravity_mult > 0.0)) {
    throw std::invalid_argument("PointMassEnv: multipliers must be positive");
  }
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("PointMassEnv: dt must be positive");
  if (cfg.horizon < 1) throw std::invalid_argument("PointMassEnv: horizon must be >= 1");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) {
    throw std::invalid_argument("PointMassEnv: gamma outside [0, 1]");
  }
  spec_.obs_dim = 2;
  spec_.action.discrete = false;
  spec_.action.low = {-1.0};
  spec_.action.high = {1.0};
  spec_.horizon = cfg.horizon;
  spec_.gamma = cfg.gamma;
}

Observation PointMassEnv::reset(Rng& rng) {
  x_ = rng.uniform(-cfg_.init_half_width, cfg_.init_half_width);
  v_ = 0.0;
  t_ = 0;
  live_ = true;
  return observe();
}

void PointMassEnv::reset_to_state(const Observation& state) {
  if (state.size() != 2) throw std::out_of_range("PointMassEnv: state must be (x, v)");
  if (std::abs(state[0]) > cfg_.x_bound || std::abs(state[1]) > cfg_.v_bound) {
    throw std::out_of_range("PointMassEnv: state outside the state box");
  }
  x_ = state[0];
  v_ = state[1];
  t_ = 0;
  live_ = true;
}

StepResult PointMassEnv::step(const Action& action, Rng& rng) {
  if (!live_) throw std::logic_error("PointMassEnv: step before reset");
  if (t_ >= cfg_.horizon) throw std::logic_error("PointMassEnv: step past the horizon");
  if (action.size() != 1) throw std::invalid_argument("PointMassEnv: action must be scalar");
  const double a = std::clamp(action[0], -1.0, 1.0);
  const double xi = rng.normal();
  double v = v_ + (a * cfg_.gravity_mult - cfg_.friction_mult * 0.5 * v_) * cfg_.dt +
             cfg_.process_noise_std * xi;
  v = std::clamp(v, -cfg_.v_bound, cfg_.v_bound);
  double x = std::clamp(x_ + v * cfg_.dt, -cfg_.x_bound, cfg_.x_bound);
  const double dx = x - cfg_.goal_position;
  const double reward = -(dx * dx) - 0.01 * a * a;
  x_ = x;
  v_ = v;
  t_ += 1;
  return {observe(), reward, t_ >= cfg_.horizon};
}

SlipChainEnv::SlipChainEnv(const SlipChainConfig& cfg) : cfg_(cfg) {
  if (cfg.n_states < 3) throw std::invalid_argument("SlipChainEnv: need at least 3 states");
  if (cfg.goal < 0 || cfg.goal >= cfg.n_states) {
    throw std::invalid_argument("SlipChainEnv: goal outside the chain");
  }
  if (!(cfg.slip_prob >= 0.0 && cfg.slip_prob <= 1.0)) {
    throw std::invalid_argument("SlipChainEnv: slip probability outside [0, 1]");
  }
  if (cfg.horizon < 1) throw std::invalid_argument("SlipChainEnv: horizon must be >= 1");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) {
    throw std::invalid_argument("SlipChainEnv: gamma outside [0, 1]");
  }
  spec_.obs_dim = 1;
  spec_.action.discrete = true;
  spec_.action.n = 2;
  spec_.horizon = cfg.horizon;
  spec_.gamma = cfg.gamma;
}

Observation SlipChainEnv::reset(Rng& /*rng*/) {
  idx_ = 0;
  t_ = 0;
  live_ = true;
  return observe();
}

void SlipChainEnv::reset_to_state(const Observation& state) {
  if (state.size() != 1) throw std::out_of_range("SlipChainEnv: state must be a single index");
  const double raw = state[0];
  const int idx = static_cast<int>(std::llround(raw));
  if (std::abs(raw - idx) > 1e-9 || idx < 0 || idx >= cfg_.n_states) {
    throw std::out_of_range("SlipChainEnv: state index outside the chain");
  }
  idx_ = idx;
  t_ = 0;
  live_ = true;
}

StepResult SlipChainEnv::step(const Action& action, Rng& rng) {
  if (!live_) throw std::logic_error("SlipChainEnv: step before reset");
  if (t_ >= cfg_.horizon) throw std::logic_error("SlipChainEnv: step past the horizon");
  if (action.size() != 1) throw std::invalid_argument("SlipChainEnv: action must be scalar");
  const int a = static_cast<int>(std::llround(action[0]));
  if (a < 0 || a > 1) throw std::invalid_argument("SlipChainEnv: action outside {0, 1}");

  if (idx_ == cfg_.goal) {
    // Absorbing after arrival; keeps coupled rollouts steppable to length.
    t_ += 1;
    return {observe(), 0.0, true};
  }
  const int intended = (a == 1) ? 1 : -1;
  const bool slip = rng.uniform_open() < cfg_.slip_prob;
  const int dir = slip ? -intended : intended;
  idx_ = std::clamp(idx_ + dir, 0, cfg_.n_states - 1);
  t_ += 1;
  const double reward = (idx_ == cfg_.goal) ? 1.0 : 0.0;
  const bool done = (idx_ == cfg_.goal) || (t_ >= cfg_.horizon);
  return {observe(), reward, done};
}

namespace {

class NegatedRewardEnv final : public Env {
 public:
  explicit NegatedRewardEnv(std::unique_ptr<Env> inner) : inner_(std::move(inner)) {
    if (!inner_) throw std::invalid_argument("negate_reward_wrapper: null environment");
  }
  const EnvSpec& spec() const override { return inner_->spec(); }
  Observation reset(Rng& rng) override { return inner_->reset(rng); }
  void reset_to_state(const Observation& state) override { inner_->reset_to_state(state); }
  StepResult step(const Action& action, Rng& rng) override {
    StepResult r = inner_->step(action, rng);
    r.reward = -r.reward;
    return r;
  }
  Observation observe() const override { return inner_->observe(); }
  std::unique_ptr<Env> clone() const override {
    return std::make_unique<NegatedRewardEnv>(inner_->clone());
  }

 private:
  std::unique_ptr<Env> inner_;
};

}  // namespace

std::unique_ptr<Env> negate_reward_wrapper(std::unique_ptr<Env> inner) {
  return std::make_unique<NegatedRewardEnv>(std::move(inner));
}

MultiFidelityPair MultiFidelityPair::make(std::unique_ptr<Env> high, std::unique_ptr<Env> low) {
  if (!high || !low) throw std::invalid_argument("MultiFidelityPair: null environment");
  if (!(high->spec() == low->spec())) {
    throw std::invalid_argument("MultiFidelityPair: fidelities must share spaces, horizon, gamma");
  }
  return {std::move(high), std::move(low)};
}

}  // namespace mfpg
