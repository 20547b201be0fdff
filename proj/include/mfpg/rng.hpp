// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mfpg {

/// Deterministic random stream. A thin wrapper over mt19937_64 with
/// distribution helpers that do not keep hidden state between draws, so a
/// stream's output depends only on its seed and the sequence of calls.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform on the open interval (0, 1); never returns 0 or 1 exactly.
  double uniform_open() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1.0p-53);
  }

  /// Standard normal via Box-Muller (one value per call, no cached state).
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is fine here; n is tiny relative to 2^64.
    return gen_() % n;
  }

 private:
  std::mt19937_64 gen_;
};

/// Derives a child seed from a root seed and a stream tag, so that streams
/// for different purposes never share draws. Adding consumers of one stream
/// cannot perturb any other stream.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

/// The named child streams used during training. High-fidelity sampling
/// touches only {init_state, policy_noise, high_transition}; low-fidelity
/// sampling has its own init/noise streams so enabling it leaves the
/// high-fidelity draws bit-identical.
struct RngStreams {
  Rng init_state;
  Rng policy_noise;
  Rng high_transition;
  Rng low_transition;
  Rng low_init_state;
  Rng low_policy_noise;
  Rng param_init;

  explicit RngStreams(std::uint64_t root_seed)
      : init_state(derive_seed(root_seed, "init-state")),
        policy_noise(derive_seed(root_seed, "policy-noise")),
        high_transition(derive_seed(root_seed, "high-transition")),
        low_transition(derive_seed(root_seed, "low-transition")),
        low_init_state(derive_seed(root_seed, "low-init-state")),
        low_policy_noise(derive_seed(root_seed, "low-policy-noise")),
        param_init(derive_seed(root_seed, "param-init")),
        root_(root_seed) {}

  /// Fresh evaluation stream for the k-th evaluation point. Evaluation never
  /// consumes training draws regardless of when it runs.
  Rng eval_stream(std::uint64_t index) const { return Rng(derive_seed(root_, "eval", index)); }

  std::uint64_t root() const { return root_; }

 private:
  std::uint64_t root_;
};

}  // namespace mfpg
