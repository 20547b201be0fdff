// SPDX-License-Identifier: Apache-2.0
#include "mfpg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfpg {

std::vector<double> returns_to_go(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    g[i] = acc;
  }
  return g;
}

TrajectoryLoss trajectory_loss(Tape& tape, const Policy& policy, const MlpVars& policy_vars,
                               const ValueNetwork* valuenet, const Trajectory& traj, double gamma,
                               bool use_baseline) {
  const std::size_t len = traj.length();
  if (len < 1) throw std::invalid_argument("trajectory_loss: empty trajectory");
  if (traj.states.size() != len + 1 || traj.actions.size() != len) {
    throw std::invalid_argument("trajectory_loss: trajectory length mismatch");
  }
  const std::vector<double> g = returns_to_go(traj.rewards, gamma);

  std::vector<Value> log_probs;
  std::vector<double> weights;
  log_probs.reserve(len);
  weights.reserve(len);
  std::vector<double> vout, vscratch;  // reused across steps
  const double inv_len = 1.0 / static_cast<double>(len);
  const bool baseline_on = use_baseline && valuenet != nullptr;
  for (std::size_t t = 0; t < len; ++t) {
    double baseline = 0.0;
    if (baseline_on) {
      valuenet->net.forward(traj.states[t], vout, vscratch);
      baseline = vout[0];
    }
    weights.push_back((g[t] - baseline) * inv_len);
    log_probs.push_back(policy.log_prob(tape, policy_vars, traj.states[t], traj.actions[t]));
  }
  Value x = tape.weighted_sum(log_probs, weights);
  return {x, tape.value(x)};
}

double trajectory_loss_value(const Policy& policy, const ValueNetwork* valuenet,
                             const Trajectory& traj, double gamma, bool use_baseline) {
  const std::size_t len = traj.length();
  if (len < 1) throw std::invalid_argument("trajectory_loss_value: empty trajectory");
  const std::vector<double> g = returns_to_go(traj.rewards, gamma);
  double acc = 0.0;
  const double inv_len = 1.0 / static_cast<double>(len);
  for (std::size_t t = 0; t < len; ++t) {
    const double baseline =
        (use_baseline && valuenet != nullptr) ? valuenet->predict(traj.states[t]) : 0.0;
    acc += (g[t] - baseline) * inv_len * policy.log_prob_value(traj.states[t], traj.actions[t]);
  }
  return acc;
}

BatchStats batch_statistics(std::span<const double> x_high, std::span<const double> x_low) {
  const std::size_t n = x_high.size();
  if (n != x_low.size()) throw std::invalid_argument("batch_statistics: unpaired inputs");
  if (n < 2) throw std::invalid_argument("batch_statistics: need at least 2 pairs");

  double mh = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mh += x_high[i];
    ml += x_low[i];
  }
  mh /= static_cast<double>(n);
  ml /= static_cast<double>(n);

  double shh = 0.0, sll = 0.0, shl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dh = x_high[i] - mh;
    const double dl = x_low[i] - ml;
    shh += dh * dh;
    sll += dl * dl;
    shl += dh * dl;
  }
  BatchStats out;
  const double denom = static_cast<double>(n - 1);
  out.s_high = std::sqrt(shh / denom);
  out.s_low = std::sqrt(sll / denom);
  out.rho = (shh > 0.0 && sll > 0.0) ? std::clamp(shl / std::sqrt(shh * sll), -1.0, 1.0) : 0.0;
  return out;
}

void ema_update(CvTracker& tracker, const BatchStats& batch) {
  if (!(tracker.eta_ma > 0.0 && tracker.eta_ma < 1.0)) {
    throw std::invalid_argument("ema_update: eta_ma outside (0, 1)");
  }
  if (!tracker.initialized) {
    tracker.rho = batch.rho;
    tracker.s_high = batch.s_high;
    tracker.s_low = batch.s_low;
    tracker.initialized = true;
    return;
  }
  const double eta = tracker.eta_ma;
  tracker.rho = eta * tracker.rho + (1.0 - eta) * batch.rho;
  tracker.s_high = eta * tracker.s_high + (1.0 - eta) * batch.s_high;
  tracker.s_low = eta * tracker.s_low + (1.0 - eta) * batch.s_low;
}

double cv_coefficient(const CvTracker& tracker) {
  if (!tracker.initialized) throw std::logic_error("cv_coefficient: tracker not initialized");
  if (!(tracker.s_low > 0.0)) return 0.0;
  return -tracker.rho * tracker.s_high / tracker.s_low;
}

Value hf_only_loss(Tape& tape, std::span<const TrajectoryLoss> x_high) {
  if (x_high.empty()) throw std::invalid_argument("hf_only_loss: empty high-fidelity batch");
  std::vector<Value> nodes;
  nodes.reserve(x_high.size());
  for (const TrajectoryLoss& x : x_high) nodes.push_back(x.node);
  return tape.mean_of(nodes);
}

Value low_fidelity_mean(Tape& tape, std::span<const TrajectoryLoss> x_low_uncorr) {
  if (x_low_uncorr.empty()) throw std::invalid_argument("low_fidelity_mean: empty batch");
  std::vector<Value> nodes;
  nodes.reserve(x_low_uncorr.size());
  for (const TrajectoryLoss& x : x_low_uncorr) nodes.push_back(x.node);
  return tape.mean_of(nodes);
}

Value mfpg_surrogate(Tape& tape, std::span<const TrajectoryLoss> x_high,
                     std::span<const TrajectoryLoss> x_low_corr, Value mu_low,
                     const SurrogateOptions& options) {
  if (x_high.empty()) throw std::invalid_argument("mfpg_surrogate: empty high-fidelity batch");

  const bool dropped = options.drop_negative_rho && options.rho_batch < 0.0;
  const bool cv_active =
      options.c_star != 0.0 && !dropped && !x_low_corr.empty() && mu_low.valid();
  if (!cv_active) return hf_only_loss(tape, x_high);

  if (x_low_corr.size() != x_high.size()) {
    throw std::invalid_argument("mfpg_surrogate: correlated batches must be paired");
  }
  Value mean_high = hf_only_loss(tape, x_high);
  Value mean_low = low_fidelity_mean(tape, x_low_corr);
  return tape.add(mean_high, tape.scale(tape.sub(mean_low, mu_low), options.c_star));
}

}  // namespace mfpg
