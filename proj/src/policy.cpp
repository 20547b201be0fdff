// SPDX-License-Identifier: Apache-2.0
#include "mfpg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfpg {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

void check_state(int obs_dim, std::span<const double> state, const char* who) {
  if (static_cast<int>(state.size()) != obs_dim) {
    throw std::invalid_argument(std::string(who) + ": observation dimension mismatch");
  }
}
}  // namespace

GaussianPolicy GaussianPolicy::make(int obs_dim, std::vector<int> hidden, int action_dim,
                                    Rng& rng) {
  GaussianPolicy p;
  p.action_dim = action_dim;
  p.trunk = Mlp::make(obs_dim, std::move(hidden), 2 * action_dim, rng);
  return p;
}

void GaussianPolicy::distribution(std::span<const double> state, std::vector<double>& mean,
                                  std::vector<double>& log_std) const {
  std::vector<double> out = trunk.forward(state);
  mean.assign(out.begin(), out.begin() + action_dim);
  log_std.resize(static_cast<std::size_t>(action_dim));
  for (int d = 0; d < action_dim; ++d) {
    log_std[d] = std::clamp(out[static_cast<std::size_t>(action_dim + d)], log_std_min, log_std_max);
  }
}

CategoricalPolicy CategoricalPolicy::make(int obs_dim, std::vector<int> hidden, int n_actions,
                                          Rng& rng) {
  CategoricalPolicy p;
  p.n_actions = n_actions;
  p.trunk = Mlp::make(obs_dim, std::move(hidden), n_actions, rng);
  return p;
}

std::vector<double> CategoricalPolicy::probabilities(std::span<const double> state) const {
  std::vector<double> logits = trunk.forward(state);
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : logits) v /= z;
  return logits;
}

double gumbel_from_uniform(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("gumbel_from_uniform: u outside (0,1)");
  return -std::log(-std::log(u));
}

int Policy::obs_dim() const {
  return std::visit([](const auto& p) { return p.trunk.input_dim; }, impl_);
}

int Policy::action_dim() const { return discrete() ? 1 : gaussian().action_dim; }

int Policy::noise_dim() const {
  return discrete() ? categorical().n_actions : gaussian().action_dim;
}

ActionNoise Policy::draw_noise(Rng& rng) const {
  ActionNoise w;
  const int n = noise_dim();
  w.values.reserve(static_cast<std::size_t>(n));
  if (discrete()) {
    for (int i = 0; i < n; ++i) w.values.push_back(rng.uniform_open());
  } else {
    for (int i = 0; i < n; ++i) w.values.push_back(rng.normal());
  }
  return w;
}

Action Policy::act_reparameterized(std::span<const double> state, const ActionNoise& noise) const {
  check_state(obs_dim(), state, "act_reparameterized");
  if (static_cast<int>(noise.values.size()) != noise_dim()) {
    throw std::invalid_argument("act_reparameterized: noise dimension mismatch");
  }
  if (discrete()) {
    const CategoricalPolicy& p = categorical();
    std::vector<double> logits = p.trunk.forward(state);
    int best = 0;
    double best_score = logits[0] + gumbel_from_uniform(noise.values[0]);
    for (int i = 1; i < p.n_actions; ++i) {
      const double s = logits[static_cast<std::size_t>(i)] + gumbel_from_uniform(noise.values[static_cast<std::size_t>(i)]);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    return {static_cast<double>(best)};
  }
  const GaussianPolicy& p = gaussian();
  std::vector<double> mean, log_std;
  p.distribution(state, mean, log_std);
  Action a(static_cast<std::size_t>(p.action_dim));
  for (int d = 0; d < p.action_dim; ++d) {
    a[static_cast<std::size_t>(d)] =
        mean[static_cast<std::size_t>(d)] + std::exp(log_std[static_cast<std::size_t>(d)]) * noise.values[static_cast<std::size_t>(d)];
  }
  return a;
}

Action Policy::act_deterministic(std::span<const double> state) const {
  check_state(obs_dim(), state, "act_deterministic");
  if (discrete()) {
    std::vector<double> logits = categorical().trunk.forward(state);
    int best = 0;
    for (int i = 1; i < categorical().n_actions; ++i) {
      if (logits[static_cast<std::size_t>(i)] > logits[static_cast<std::size_t>(best)]) best = i;
    }
    return {static_cast<double>(best)};
  }
  std::vector<double> mean, log_std;
  gaussian().distribution(state, mean, log_std);
  return mean;
}

Value Policy::log_prob(Tape& tape, const MlpVars& vars, std::span<const double> state,
                       const Action& action) const {
  check_state(obs_dim(), state, "log_prob");
  if (discrete()) {
    const CategoricalPolicy& p = categorical();
    if (action.size() != 1) throw std::invalid_argument("log_prob: discrete action must be scalar");
    const int idx = static_cast<int>(std::llround(action[0]));
    if (idx < 0 || idx >= p.n_actions) {
      throw std::domain_error("log_prob: action outside the policy's support");
    }
    Value logits = mlp_forward(tape, p.trunk, vars, state);
    Value lp = tape.sub(tape.pick(logits, idx), tape.log_sum_exp(logits));
    if (!std::isfinite(tape.value(lp))) {
      throw std::domain_error("log_prob: zero-probability action (log-mass is -inf)");
    }
    return lp;
  }
  const GaussianPolicy& p = gaussian();
  if (static_cast<int>(action.size()) != p.action_dim) {
    throw std::invalid_argument("log_prob: action dimension mismatch");
  }
  Value out = mlp_forward(tape, p.trunk, vars, state);
  Value mu = tape.slice(out, 0, p.action_dim);
  Value ls = tape.clamp(tape.slice(out, p.action_dim, p.action_dim), p.log_std_min, p.log_std_max);
  // z = (a - mu) * exp(-ls); lp = -sum(0.5*z^2 + ls) - 0.5*d*log(2*pi)
  Value diff = tape.sub(tape.constant(action), mu);
  Value z = tape.mul(diff, tape.exp(tape.neg(ls)));
  Value inner = tape.add(tape.scale(tape.square(z), 0.5), ls);
  return tape.offset(tape.neg(tape.sum(inner)), -0.5 * p.action_dim * kLogTwoPi);
}

double Policy::log_prob_value(std::span<const double> state, const Action& action) const {
  check_state(obs_dim(), state, "log_prob_value");
  if (discrete()) {
    const CategoricalPolicy& p = categorical();
    const int idx = static_cast<int>(std::llround(action.at(0)));
    if (idx < 0 || idx >= p.n_actions) {
      throw std::domain_error("log_prob_value: action outside the policy's support");
    }
    std::vector<double> logits = p.trunk.forward(state);
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : logits) z += std::exp(v - mx);
    return logits[static_cast<std::size_t>(idx)] - (mx + std::log(z));
  }
  const GaussianPolicy& p = gaussian();
  std::vector<double> mean, log_std;
  p.distribution(state, mean, log_std);
  double lp = -0.5 * p.action_dim * kLogTwoPi;
  for (int d = 0; d < p.action_dim; ++d) {
    const double zd = (action[static_cast<std::size_t>(d)] - mean[static_cast<std::size_t>(d)]) *
                      std::exp(-log_std[static_cast<std::size_t>(d)]);
    lp -= 0.5 * zd * zd + log_std[static_cast<std::size_t>(d)];
  }
  return lp;
}

MlpVars Policy::register_on(Tape& tape) const { return register_mlp(tape, trunk()); }

std::vector<Tensor>& Policy::parameters() {
  return std::visit([](auto& p) -> std::vector<Tensor>& { return p.trunk.params; }, impl_);
}

const std::vector<Tensor>& Policy::parameters() const {
  return std::visit([](const auto& p) -> const std::vector<Tensor>& { return p.trunk.params; },
                    impl_);
}

const Mlp& Policy::trunk() const {
  return std::visit([](const auto& p) -> const Mlp& { return p.trunk; }, impl_);
}

std::vector<Tensor> Policy::gradients(const Tape& tape, const MlpVars& vars) const {
  return collect_gradients(tape, trunk(), vars);
}

ValueNetwork ValueNetwork::make(int obs_dim, std::vector<int> hidden, Rng& rng) {
  ValueNetwork v;
  v.net = Mlp::make(obs_dim, std::move(hidden), 1, rng);
  return v;
}

double ValueNetwork::predict(std::span<const double> state) const {
  return net.forward(state)[0];
}

Value ValueNetwork::predict_on(Tape& tape, const MlpVars& vars, std::span<const double> state) const {
  return mlp_forward(tape, net, vars, state);
}

}  // namespace mfpg
