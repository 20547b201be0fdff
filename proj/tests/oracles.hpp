// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used as test oracles. Everything
// here recomputes expected values through a different route than the library
// code under test.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "mfpg/env.hpp"
#include "mfpg/policy.hpp"
#include "mfpg/tensor.hpp"

namespace oracle {

/// O(T^2) reward-to-go by direct double summation.
inline std::vector<double> returns_to_go_naive(const std::vector<double>& rewards, double gamma) {
  std::vector<double> g(rewards.size(), 0.0);
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    double acc = 0.0;
    double w = 1.0;
    for (std::size_t n = t; n < rewards.size(); ++n) {
      acc += w * rewards[n];
      w *= gamma;
    }
    g[t] = acc;
  }
  return g;
}

/// Textbook Pearson correlation and sample standard deviations.
struct PearsonResult {
  double rho, s_x, s_y;
};
inline PearsonResult pearson_direct(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return {sxy / std::sqrt(sxx * syy), std::sqrt(sxx / (n - 1)), std::sqrt(syy / (n - 1))};
}

/// Central finite differences of a scalar function of one tensor set.
inline std::vector<mfpg::Tensor> finite_difference_gradient(
    std::vector<mfpg::Tensor>& params, const std::function<double()>& eval, double h = 1e-5) {
  std::vector<mfpg::Tensor> grads;
  for (mfpg::Tensor& t : params) grads.emplace_back(t.shape());
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      const double saved = params[i][j];
      params[i][j] = saved + h;
      const double fp = eval();
      params[i][j] = saved - h;
      const double fm = eval();
      params[i][j] = saved;
      grads[i][j] = (fp - fm) / (2.0 * h);
    }
  }
  return grads;
}

/// Loop-free forward pass of a fixed 2-4-1 tanh network, written out by
/// hand; checks the generic layer loop against straight-line arithmetic.
inline double forward_241_straight_line(const std::vector<mfpg::Tensor>& p, double x0, double x1) {
  const mfpg::Tensor& w1 = p[0];
  const mfpg::Tensor& b1 = p[1];
  const mfpg::Tensor& w2 = p[2];
  const mfpg::Tensor& b2 = p[3];
  const double h0 = std::tanh(w1.at(0, 0) * x0 + w1.at(0, 1) * x1 + b1[0]);
  const double h1 = std::tanh(w1.at(1, 0) * x0 + w1.at(1, 1) * x1 + b1[1]);
  const double h2 = std::tanh(w1.at(2, 0) * x0 + w1.at(2, 1) * x1 + b1[2]);
  const double h3 = std::tanh(w1.at(3, 0) * x0 + w1.at(3, 1) * x1 + b1[3]);
  return w2.at(0, 0) * h0 + w2.at(0, 1) * h1 + w2.at(0, 2) * h2 + w2.at(0, 3) * h3 + b2[0];
}

/// Independent softmax over a categorical policy's logits.
inline std::vector<double> softmax_direct(const std::vector<double>& logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

// ---------------------------------------------------------------------------
// SlipChain exhaustive enumeration.
// ---------------------------------------------------------------------------

/// A fully enumerated chain trajectory with its exact probability.
struct EnumeratedTrajectory {
  double probability = 1.0;
  std::vector<int> states;   // length L+1
  std::vector<int> actions;  // length L
  std::vector<double> rewards;
};

inline int chain_next(int idx, int action, bool slip, int n_states) {
  const int intended = (action == 1) ? 1 : -1;
  const int dir = slip ? -intended : intended;
  return std::clamp(idx + dir, 0, n_states - 1);
}

/// Enumerates every trajectory of the chain under the policy's per-state
/// action probabilities, branching over (action, slip) at each step; the
/// episode stops at the goal or the horizon.
inline std::vector<EnumeratedTrajectory> enumerate_chain_trajectories(
    const mfpg::SlipChainConfig& cfg,
    const std::function<std::vector<double>(int)>& action_probs) {
  std::vector<EnumeratedTrajectory> out;
  std::function<void(EnumeratedTrajectory, int, int)> walk = [&](EnumeratedTrajectory prefix,
                                                                 int state, int t) {
    if (state == cfg.goal || t == cfg.horizon) {
      out.push_back(std::move(prefix));
      return;
    }
    const std::vector<double> pa = action_probs(state);
    for (int a = 0; a < 2; ++a) {
      for (int slip = 0; slip < 2; ++slip) {
        const double p_branch = pa[a] * (slip ? cfg.slip_prob : 1.0 - cfg.slip_prob);
        if (p_branch == 0.0) continue;
        EnumeratedTrajectory next = prefix;
        next.probability *= p_branch;
        const int ns = chain_next(state, a, slip != 0, cfg.n_states);
        next.actions.push_back(a);
        next.states.push_back(ns);
        next.rewards.push_back(ns == cfg.goal ? 1.0 : 0.0);
        walk(std::move(next), ns, t + 1);
      }
    }
  };
  EnumeratedTrajectory root;
  root.states.push_back(0);
  walk(std::move(root), 0, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Coupled enumeration for two chains driven by shared Gumbel-max noise.
// ---------------------------------------------------------------------------

inline double logistic_cdf(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Joint probabilities of the two argmax outcomes when the same 2-class
/// Gumbel noise is applied to logits at (possibly different) states. The
/// shared randomness reduces to one logistic variable D = G_1 - G_0;
/// action 1 is chosen iff D exceeds log(p_0 / p_1) at that state.
struct JointActionProbs {
  double p[2][2];  // [high action][low action]
};
inline JointActionProbs gumbel_joint_action_probs(const std::vector<double>& logits_high,
                                                  const std::vector<double>& logits_low) {
  const double th = logits_high[0] - logits_high[1];
  const double tl = logits_low[0] - logits_low[1];
  JointActionProbs j{};
  j.p[1][1] = 1.0 - logistic_cdf(std::max(th, tl));
  j.p[0][0] = logistic_cdf(std::min(th, tl));
  j.p[1][0] = std::max(0.0, logistic_cdf(tl) - logistic_cdf(th));
  j.p[0][1] = std::max(0.0, logistic_cdf(th) - logistic_cdf(tl));
  return j;
}

/// Exact joint distribution of (high total reward, low total reward) for a
/// correlated chain pair under shared action noise, enumerating joint action
/// events and the two independent slip draws. The low rollout runs exactly
/// as long as the high one, absorbing at its goal.
inline std::map<std::pair<double, double>, double> enumerate_coupled_chain_returns(
    const mfpg::SlipChainConfig& cfg,
    const std::function<std::vector<double>(int)>& logits_at) {
  std::map<std::pair<double, double>, double> dist;
  struct State {
    int sh, sl, t;
    double rh, rl, prob;
  };
  std::function<void(State)> walk = [&](State s) {
    if (s.sh == cfg.goal || s.t == cfg.horizon) {
      dist[{s.rh, s.rl}] += s.prob;
      return;
    }
    const JointActionProbs j = gumbel_joint_action_probs(logits_at(s.sh), logits_at(s.sl));
    for (int ah = 0; ah < 2; ++ah) {
      for (int al = 0; al < 2; ++al) {
        if (j.p[ah][al] == 0.0) continue;
        for (int slip_h = 0; slip_h < 2; ++slip_h) {
          for (int slip_l = 0; slip_l < 2; ++slip_l) {
            double p = s.prob * j.p[ah][al] * (slip_h ? cfg.slip_prob : 1.0 - cfg.slip_prob);
            const int nh = chain_next(s.sh, ah, slip_h != 0, cfg.n_states);
            int nl = s.sl;
            double rl_gain = 0.0;
            if (s.sl == cfg.goal) {
              // Low side absorbing: the slip draw is not consumed; fold the
              // slip_l branch away by only taking slip_l == 0 at weight 1.
              if (slip_l == 1) continue;
            } else {
              p *= slip_l ? cfg.slip_prob : 1.0 - cfg.slip_prob;
              nl = chain_next(s.sl, al, slip_l != 0, cfg.n_states);
              rl_gain = (nl == cfg.goal) ? 1.0 : 0.0;
            }
            walk({nh, nl, s.t + 1, s.rh + (nh == cfg.goal ? 1.0 : 0.0), s.rl + rl_gain, p});
          }
        }
      }
    }
  };
  walk({0, 0, 0, 0.0, 0.0, 1.0});
  return dist;
}

/// Total variation distance between two discrete distributions over keys.
template <typename Key>
double total_variation(const std::map<Key, double>& a, const std::map<Key, double>& b) {
  double tv = 0.0;
  for (const auto& [k, p] : a) {
    auto it = b.find(k);
    tv += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, p] : b) {
    if (!a.count(k)) tv += p;
  }
  return 0.5 * tv;
}

/// Simpson quadrature on a uniform grid (n must be even).
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace oracle
