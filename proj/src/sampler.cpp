// SPDX-License-Identifier: Apache-2.0
#include "mfpg/sampler.hpp"

#include <stdexcept>

namespace mfpg {

double Trajectory::total_reward() const {
  double s = 0.0;
  for (double r : rewards) s += r;
  return s;
}

long total_transitions(const std::vector<Trajectory>& trajectories) {
  long n = 0;
  for (const Trajectory& t : trajectories) n += static_cast<long>(t.length());
  return n;
}

long total_high_transitions(const std::vector<CorrelatedPair>& pairs) {
  long n = 0;
  for (const CorrelatedPair& p : pairs) n += static_cast<long>(p.high.length());
  return n;
}

namespace {

std::vector<ActionNoise> draw_noise_sequence(const Policy& policy, int horizon, Rng& rng) {
  std::vector<ActionNoise> seq;
  seq.reserve(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) seq.push_back(policy.draw_noise(rng));
  return seq;
}

/// Rolls `env` from a fresh reset, stopping at `done`. The noise sequence is
/// drawn up front for the full horizon so stream consumption does not depend
/// on the termination time.
Trajectory roll_fresh(const Policy& policy, Env& env, Rng& init_rng, Rng& noise_rng,
                      Rng& transition_rng, Fidelity fidelity) {
  const int horizon = env.spec().horizon;
  std::vector<ActionNoise> noise = draw_noise_sequence(policy, horizon, noise_rng);
  Trajectory traj;
  traj.fidelity = fidelity;
  traj.states.push_back(env.reset(init_rng));
  for (int t = 0; t < horizon; ++t) {
    Action a = policy.act_reparameterized(traj.states.back(), noise[static_cast<std::size_t>(t)]);
    StepResult r = env.step(a, transition_rng);
    traj.actions.push_back(std::move(a));
    traj.rewards.push_back(r.reward);
    traj.noise.push_back(std::move(noise[static_cast<std::size_t>(t)]));
    traj.states.push_back(std::move(r.next_state));
    if (r.done) break;
  }
  return traj;
}

}  // namespace

std::vector<CorrelatedPair> sample_correlated_pairs(const Policy& policy, MultiFidelityPair& pair,
                                                    int n, RngStreams& streams,
                                                    const SampleOptions& options) {
  if (n < 1) throw std::invalid_argument("sample_correlated_pairs: n must be >= 1");
  if (options.reconstrain_period < 0) {
    throw std::invalid_argument("sample_correlated_pairs: negative reconstrain period");
  }
  std::vector<CorrelatedPair> out;
  out.reserve(static_cast<std::size_t>(n));
  const int horizon = pair.high->spec().horizon;

  for (int i = 0; i < n; ++i) {
    CorrelatedPair cp;
    cp.reconstrain_period = options.reconstrain_period;

    std::vector<ActionNoise> noise = draw_noise_sequence(policy, horizon, streams.policy_noise);

    // High rollout.
    cp.high.fidelity = Fidelity::kHigh;
    cp.high.states.push_back(pair.high->reset(streams.init_state));
    for (int t = 0; t < horizon; ++t) {
      Action a = policy.act_reparameterized(cp.high.states.back(), noise[static_cast<std::size_t>(t)]);
      StepResult r = pair.high->step(a, streams.high_transition);
      cp.high.actions.push_back(std::move(a));
      cp.high.rewards.push_back(r.reward);
      cp.high.states.push_back(std::move(r.next_state));
      if (r.done) break;
    }
    const int len = static_cast<int>(cp.high.length());

    cp.high.noise.assign(noise.begin(), noise.begin() + len);

    // Low rollout: matched initial state, same length; replay the noise
    // record unless the reparameterization coupling is ablated.
    cp.low.fidelity = Fidelity::kLow;
    pair.low->reset_to_state(cp.high.states.front());
    cp.low.states.push_back(cp.high.states.front());
    for (int t = 0; t < len; ++t) {
      if (options.reconstrain_period > 0 && t > 0 && t % options.reconstrain_period == 0) {
        cp.low.states.back() = cp.high.states[static_cast<std::size_t>(t)];
        pair.low->reset_to_state(cp.low.states.back());
      }
      cp.low.noise.push_back(options.share_noise ? cp.high.noise[static_cast<std::size_t>(t)]
                                                 : policy.draw_noise(streams.low_policy_noise));
      Action a = policy.act_reparameterized(cp.low.states.back(), cp.low.noise.back());
      StepResult r = pair.low->step(a, streams.low_transition);
      cp.low.actions.push_back(std::move(a));
      cp.low.rewards.push_back(r.reward);
      cp.low.states.push_back(std::move(r.next_state));
    }
    if (options.reconstrain_period > 0 && len % options.reconstrain_period == 0) {
      cp.low.states.back() = cp.high.states[static_cast<std::size_t>(len)];
    }
    out.push_back(std::move(cp));
  }
  return out;
}

std::vector<CorrelatedPair> sample_with_reconstraining(const Policy& policy,
                                                       MultiFidelityPair& pair, int n, int period,
                                                       RngStreams& streams) {
  if (period < 1) throw std::invalid_argument("sample_with_reconstraining: period must be >= 1");
  SampleOptions opt;
  opt.reconstrain_period = period;
  return sample_correlated_pairs(policy, pair, n, streams, opt);
}

std::vector<Trajectory> sample_uncorrelated(const Policy& policy, Env& env, int n, Rng& init_rng,
                                            Rng& noise_rng, Rng& transition_rng,
                                            Fidelity fidelity) {
  if (n < 0) throw std::invalid_argument("sample_uncorrelated: n must be >= 0");
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(roll_fresh(policy, env, init_rng, noise_rng, transition_rng, fidelity));
  }
  return out;
}

std::vector<Trajectory> sample_high_only(const Policy& policy, Env& env, int n,
                                         RngStreams& streams) {
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(roll_fresh(policy, env, streams.init_state, streams.policy_noise,
                             streams.high_transition, Fidelity::kHigh));
  }
  return out;
}

std::vector<CorrelatedPair> sample_correlated_until(const Policy& policy, MultiFidelityPair& pair,
                                                    long min_transitions, RngStreams& streams,
                                                    const SampleOptions& options) {
  std::vector<CorrelatedPair> out;
  long got = 0;
  while (got < min_transitions) {
    auto one = sample_correlated_pairs(policy, pair, 1, streams, options);
    got += static_cast<long>(one.front().high.length());
    out.push_back(std::move(one.front()));
  }
  return out;
}

std::vector<Trajectory> sample_high_only_until(const Policy& policy, Env& env,
                                               long min_transitions, RngStreams& streams) {
  std::vector<Trajectory> out;
  long got = 0;
  while (got < min_transitions) {
    auto one = sample_high_only(policy, env, 1, streams);
    got += static_cast<long>(one.front().length());
    out.push_back(std::move(one.front()));
  }
  return out;
}

std::vector<Trajectory> sample_uncorrelated_until(const Policy& policy, Env& env,
                                                  long min_transitions, Rng& init_rng,
                                                  Rng& noise_rng, Rng& transition_rng,
                                                  Fidelity fidelity) {
  std::vector<Trajectory> out;
  long got = 0;
  while (got < min_transitions) {
    out.push_back(roll_fresh(policy, env, init_rng, noise_rng, transition_rng, fidelity));
    got += static_cast<long>(out.back().length());
  }
  return out;
}

}  // namespace mfpg
