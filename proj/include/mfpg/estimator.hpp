// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "mfpg/policy.hpp"
#include "mfpg/sampler.hpp"

namespace mfpg {

/// Discounted reward-to-go sequence, G_t = sum_{n >= t} gamma^(n-t) r_n,
/// computed by backward recursion.
std::vector<double> returns_to_go(std::span<const double> rewards, double gamma);

/// One trajectory's policy-gradient random variable X: a differentiable node
/// and its detached scalar value for statistics.
struct TrajectoryLoss {
  Value node;
  double scalar = 0.0;
};

/// X = (1/L) * sum_t (G_t - V(s_t)) * log pi(a_t | s_t) over the trajectory's
/// own length L. The baseline V is evaluated without a graph: no gradient
/// flows into the value parameters from X. Pass a null value network (or
/// use_baseline = false) for plain REINFORCE.
TrajectoryLoss trajectory_loss(Tape& tape, const Policy& policy, const MlpVars& policy_vars,
                               const ValueNetwork* valuenet, const Trajectory& traj, double gamma,
                               bool use_baseline);

/// Same arithmetic, scalar only (no graph); used by the variance harness and
/// as an independent evaluation path in tests.
double trajectory_loss_value(const Policy& policy, const ValueNetwork* valuenet,
                             const Trajectory& traj, double gamma, bool use_baseline);

struct BatchStats {
  double rho = 0.0;     // Pearson correlation of paired (X^h, X^l)
  double s_high = 0.0;  // sample standard deviations, n-1 denominator
  double s_low = 0.0;
};

/// Paired batch statistics. A zero-variance side makes the correlation
/// undefined; it is reported as 0 so the control variate shuts off.
BatchStats batch_statistics(std::span<const double> x_high, std::span<const double> x_low);

/// Exponential moving averages of the correlation and the two standard
/// deviations. The first update copies the batch statistics verbatim.
struct CvTracker {
  double rho = 0.0;
  double s_high = 0.0;
  double s_low = 0.0;
  double eta_ma = 0.95;
  bool initialized = false;
};

void ema_update(CvTracker& tracker, const BatchStats& batch);

/// c* = -rho * s_high / s_low from the tracker's running statistics;
/// 0 when s_low is 0 (control variate disabled for the iteration).
double cv_coefficient(const CvTracker& tracker);

struct SurrogateOptions {
  double c_star = 0.0;
  bool drop_negative_rho = false;
  double rho_batch = 0.0;
};

/// The estimator whose gradient is the policy update:
///   (1/N^h) sum_i [ X^h_i + c* (X^l_i - mu_low) ]
/// with mu_low an average of differentiable low-fidelity losses (gradient
/// flows through it). The control-variate term is omitted entirely when
/// c* == 0, when no correlated lows are supplied, or when drop_negative_rho
/// is set and the batch correlation is negative; in those cases the result
/// is built exactly like the high-fidelity-only loss.
Value mfpg_surrogate(Tape& tape, std::span<const TrajectoryLoss> x_high,
                     std::span<const TrajectoryLoss> x_low_corr, Value mu_low,
                     const SurrogateOptions& options);

/// Mean of the high-fidelity losses (the plain REINFORCE objective).
Value hf_only_loss(Tape& tape, std::span<const TrajectoryLoss> x_high);

/// mu_low over the uncorrelated batch, as a differentiable node.
Value low_fidelity_mean(Tape& tape, std::span<const TrajectoryLoss> x_low_uncorr);

}  // namespace mfpg
