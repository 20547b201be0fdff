// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mfpg/env.hpp"
#include "mfpg/policy.hpp"
#include "mfpg/rng.hpp"

namespace mfpg {

enum class Fidelity { kHigh, kLow };

/// One rollout. For an episode of length L: L+1 states, L actions, L rewards
/// and the L per-step action-noise outcomes that drove the action sampling.
struct Trajectory {
  std::vector<Observation> states;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<ActionNoise> noise;
  Fidelity fidelity = Fidelity::kHigh;

  std::size_t length() const { return rewards.size(); }
  double total_reward() const;
};

/// A high/low pair sharing the initial state and the action-noise record.
/// `reconstrain_period` > 0 marks the low trajectory as periodically snapped
/// back to the high one (a biased coupling).
struct CorrelatedPair {
  Trajectory high;
  Trajectory low;
  int reconstrain_period = 0;
};

struct SampleOptions {
  /// Reuse the high rollout's action noise on the low side. Off = the
  /// no-reparameterization ablation (fresh noise, matched initial state).
  bool share_noise = true;
  /// Snap the low state back to the high state every this many steps
  /// (0 = never).
  int reconstrain_period = 0;
};

/// Correlated trajectory sampling: per pair, draw one action-noise sequence
/// for the full horizon, roll the high environment with it, reset the low
/// environment to the high initial state, and roll the low environment for
/// exactly the high rollout's length (reusing the noise when shared).
/// Transition randomness stays independent across fidelities.
std::vector<CorrelatedPair> sample_correlated_pairs(const Policy& policy, MultiFidelityPair& pair,
                                                    int n, RngStreams& streams,
                                                    const SampleOptions& options = {});

/// Correlated sampling with periodic reconstraining (options.reconstrain_period).
std::vector<CorrelatedPair> sample_with_reconstraining(const Policy& policy,
                                                       MultiFidelityPair& pair, int n, int period,
                                                       RngStreams& streams);

/// Standard rollouts with fresh initial states and fresh noise.
std::vector<Trajectory> sample_uncorrelated(const Policy& policy, Env& env, int n, Rng& init_rng,
                                            Rng& noise_rng, Rng& transition_rng,
                                            Fidelity fidelity = Fidelity::kLow);

/// High-fidelity-only rollouts that consume the init/noise/transition streams
/// exactly as the high half of sample_correlated_pairs does, so switching the
/// low side on or off never perturbs the high-fidelity draws.
std::vector<Trajectory> sample_high_only(const Policy& policy, Env& env, int n,
                                         RngStreams& streams);

/// Keep sampling whole pairs until the high side has consumed at least
/// `min_transitions` environment steps.
std::vector<CorrelatedPair> sample_correlated_until(const Policy& policy, MultiFidelityPair& pair,
                                                    long min_transitions, RngStreams& streams,
                                                    const SampleOptions& options = {});

std::vector<Trajectory> sample_high_only_until(const Policy& policy, Env& env,
                                               long min_transitions, RngStreams& streams);

std::vector<Trajectory> sample_uncorrelated_until(const Policy& policy, Env& env,
                                                  long min_transitions, Rng& init_rng,
                                                  Rng& noise_rng, Rng& transition_rng,
                                                  Fidelity fidelity = Fidelity::kLow);

long total_transitions(const std::vector<Trajectory>& trajectories);
long total_high_transitions(const std::vector<CorrelatedPair>& pairs);

}  // namespace mfpg
