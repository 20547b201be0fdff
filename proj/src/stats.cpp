// SPDX-License-Identifier: Apache-2.0
#include "mfpg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfpg {

EvalPoint evaluate(const Policy& policy, Env& env, int episodes, Rng& rng) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  EvalPoint p;
  p.episode_returns.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    Observation s = env.reset(rng);
    double ret = 0.0;
    for (int t = 0; t < env.spec().horizon; ++t) {
      StepResult r = env.step(policy.act_deterministic(s), rng);
      ret += r.reward;
      s = std::move(r.next_state);
      if (r.done) break;
    }
    p.episode_returns.push_back(ret);
  }
  double sum = 0.0;
  for (double r : p.episode_returns) sum += r;
  p.mean_return = sum / static_cast<double>(episodes);
  return p;
}

double final_return(const EvalCurve& curve, int window) {
  if (curve.empty()) throw std::invalid_argument("final_return: empty curve");
  const std::size_t n = curve.points.size();
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 1)), n);
  double sum = 0.0;
  for (std::size_t i = n - w; i < n; ++i) sum += curve.points[i].mean_return;
  return sum / static_cast<double>(w);
}

double auc(const EvalCurve& curve) {
  if (curve.points.size() < 2) throw std::invalid_argument("auc: need at least 2 points");
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    const EvalPoint& a = curve.points[i];
    const EvalPoint& b = curve.points[i + 1];
    if (b.step <= a.step) throw std::invalid_argument("auc: steps must strictly increase");
    area += 0.5 * (a.mean_return + b.mean_return) * static_cast<double>(b.step - a.step);
  }
  return area;
}

namespace {

double percentile(std::vector<double>& sorted_in_place, double q) {
  std::sort(sorted_in_place.begin(), sorted_in_place.end());
  const double pos = q * static_cast<double>(sorted_in_place.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted_in_place.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return (1.0 - frac) * sorted_in_place[lo] + frac * sorted_in_place[hi];
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double resampled_mean(std::span<const double> xs, Rng& rng) {
  const std::size_t n = xs.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += xs[rng.below(n)];
  return s / static_cast<double>(n);
}

}  // namespace

BootstrapResult bootstrap_mean_ci(std::span<const double> samples, int resamples, double level,
                                  Rng& rng) {
  if (samples.size() < 2) throw std::invalid_argument("bootstrap_mean_ci: need >= 2 samples");
  if (resamples < 1 || !(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("bootstrap_mean_ci: bad resamples/level");
  }
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (double& m : means) m = resampled_mean(samples, rng);
  BootstrapResult out;
  out.point = mean_of(samples);
  out.resamples = resamples;
  const double alpha = 1.0 - level;
  std::vector<double> tmp = means;
  out.ci_low = percentile(tmp, alpha / 2.0);
  out.ci_high = percentile(tmp, 1.0 - alpha / 2.0);
  return out;
}

BootstrapResult bootstrap_diff_ci(std::span<const double> a, std::span<const double> b,
                                  int resamples, double level, Rng& rng) {
  if (a.size() < 1 || b.size() < 1) throw std::invalid_argument("bootstrap_diff_ci: empty input");
  if (resamples < 1 || !(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("bootstrap_diff_ci: bad resamples/level");
  }
  std::vector<double> deltas(static_cast<std::size_t>(resamples));
  for (double& d : deltas) d = resampled_mean(a, rng) - resampled_mean(b, rng);
  BootstrapResult out;
  out.point = mean_of(a) - mean_of(b);
  out.resamples = resamples;
  const double alpha = 1.0 - level;
  std::vector<double> tmp = deltas;
  out.ci_low = percentile(tmp, alpha / 2.0);
  out.ci_high = percentile(tmp, 1.0 - alpha / 2.0);
  return out;
}

int collapse_count(std::span<const double> method_medians,
                   std::span<const double> reference_medians) {
  if (method_medians.size() != reference_medians.size()) {
    throw std::invalid_argument("collapse_count: unaligned inputs");
  }
  int count = 0;
  for (std::size_t i = 0; i < method_medians.size(); ++i) {
    const double ref = reference_medians[i];
    // For ref > 0 this is the plain "below 50% of the reference" rule; the
    // |ref| margin keeps the threshold on the worse side for ref <= 0.
    const double threshold = ref - 0.5 * std::abs(ref);
    if (method_medians[i] < threshold) ++count;
  }
  return count;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty input");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return (n % 2 == 1) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

Policy policy_from_params(const EnvSpec& spec, const std::vector<int>& hidden,
                          const std::vector<Tensor>& params) {
  Rng dummy(0);
  Policy policy = spec.action.discrete
                      ? Policy(CategoricalPolicy::make(spec.obs_dim, hidden, spec.action.n, dummy))
                      : Policy(GaussianPolicy::make(spec.obs_dim, hidden,
                                                    static_cast<int>(spec.action.low.size()), dummy));
  if (params.size() != policy.parameters().size()) {
    throw std::invalid_argument("policy_from_params: parameter arity mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != policy.parameters()[i].shape()) {
      throw std::invalid_argument("policy_from_params: parameter shape mismatch");
    }
  }
  policy.parameters() = params;
  return policy;
}

ValueNetwork valuenet_from_params(const EnvSpec& spec, const std::vector<int>& hidden,
                                  const std::vector<Tensor>& params) {
  Rng dummy(0);
  ValueNetwork v = ValueNetwork::make(spec.obs_dim, hidden, dummy);
  if (params.size() != v.net.params.size()) {
    throw std::invalid_argument("valuenet_from_params: parameter arity mismatch");
  }
  v.net.params = params;
  return v;
}

namespace {

struct PilotEstimates {
  double c_star = 0.0;
  double mu_low = 0.0;
};

/// Pools pilot pairs to pin c* and mu_low; the measured batches then see
/// them as constants, so the recorded variance is that of the control
/// variate itself, not of the auxiliary estimates.
PilotEstimates run_pilot(const Policy& policy, const ValueNetwork* vnet, MultiFidelityPair& pair,
                         const VarianceSpec& spec, const VarianceStudyOptions& opt,
                         RngStreams& streams) {
  std::vector<double> xh, xl;
  for (int b = 0; b < opt.pilot_batches; ++b) {
    auto pairs = sample_correlated_until(policy, pair, spec.batch_transitions, streams);
    for (const CorrelatedPair& cp : pairs) {
      xh.push_back(trajectory_loss_value(policy, vnet, cp.high, opt.gamma, spec.use_baseline));
      xl.push_back(trajectory_loss_value(policy, vnet, cp.low, opt.gamma, spec.use_baseline));
    }
  }
  auto lows = sample_uncorrelated_until(
      policy, *pair.low,
      static_cast<long>(spec.batch_transitions) * std::max(opt.low_multiplier, 1),
      streams.low_init_state, streams.low_policy_noise, streams.low_transition);
  double mu = 0.0;
  for (const Trajectory& t : lows) {
    mu += trajectory_loss_value(policy, vnet, t, opt.gamma, spec.use_baseline);
  }
  mu /= static_cast<double>(lows.size());

  PilotEstimates est;
  est.mu_low = mu;
  BatchStats stats = batch_statistics(xh, xl);
  est.c_star = (stats.s_low > 0.0) ? -stats.rho * stats.s_high / stats.s_low : 0.0;
  return est;
}

double sample_variance(std::span<const double> xs) {
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

}  // namespace

std::vector<VarianceRow> variance_study(std::span<const Checkpoint> checkpoints,
                                        const MultiFidelityPair& pair,
                                        std::span<const VarianceSpec> specs,
                                        const VarianceStudyOptions& options, std::uint64_t seed,
                                        const std::vector<int>& policy_hidden,
                                        const std::vector<int>& value_hidden) {
  if (checkpoints.empty()) throw std::invalid_argument("variance_study: no checkpoints");
  if (options.repeats < 2) throw std::invalid_argument("variance_study: repeats must be >= 2");

  std::vector<VarianceRow> rows;
  const EnvSpec& env_spec = pair.high->spec();
  std::uint64_t stream_index = 0;

  for (const Checkpoint& ck : checkpoints) {
    Policy policy = policy_from_params(env_spec, policy_hidden, ck.policy_params);
    ValueNetwork vnet = valuenet_from_params(env_spec, value_hidden, ck.value_params);
    for (const VarianceSpec& spec : specs) {
      if (spec.batch_transitions < 1) {
        throw std::invalid_argument("variance_study: batch_transitions must be >= 1");
      }
      MultiFidelityPair local = pair.clone();
      RngStreams streams(derive_seed(seed, "variance-study", stream_index++));
      const ValueNetwork* baseline = spec.use_baseline ? &vnet : nullptr;

      PilotEstimates pilot;
      if (spec.mfpg) pilot = run_pilot(policy, baseline, local, spec, options, streams);

      std::vector<double> scalars;
      scalars.reserve(static_cast<std::size_t>(options.repeats));
      for (int r = 0; r < options.repeats; ++r) {
        double batch_scalar = 0.0;
        if (spec.mfpg) {
          auto pairs = sample_correlated_until(policy, local, spec.batch_transitions, streams);
          double acc = 0.0;
          for (const CorrelatedPair& cp : pairs) {
            const double xh =
                trajectory_loss_value(policy, baseline, cp.high, options.gamma, spec.use_baseline);
            const double xl =
                trajectory_loss_value(policy, baseline, cp.low, options.gamma, spec.use_baseline);
            acc += xh + pilot.c_star * (xl - pilot.mu_low);
          }
          batch_scalar = acc / static_cast<double>(pairs.size());
        } else {
          auto highs =
              sample_high_only_until(policy, *local.high, spec.batch_transitions, streams);
          double acc = 0.0;
          for (const Trajectory& t : highs) {
            acc += trajectory_loss_value(policy, baseline, t, options.gamma, spec.use_baseline);
          }
          batch_scalar = acc / static_cast<double>(highs.size());
        }
        scalars.push_back(batch_scalar);
      }
      rows.push_back({ck.step, spec, sample_variance(scalars), options.repeats});
    }
  }
  return rows;
}

}  // namespace mfpg
