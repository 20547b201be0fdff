// SPDX-License-Identifier: Apache-2.0
#include "mfpg/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mfpg {

AdamState AdamState::like(const std::vector<Tensor>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor& p : params) {
    s.m.emplace_back(p.shape());
    s.v.emplace_back(p.shape());
  }
  return s;
}

double global_norm(const std::vector<Tensor>& ts) {
  double acc = 0.0;
  for (const Tensor& t : ts) {
    for (double x : t.data()) acc += x * x;
  }
  return std::sqrt(acc);
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               double lr, double max_grad_norm) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient/state arity mismatch");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: lr must be positive");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size()) {
      throw std::invalid_argument("adam_step: shape mismatch");
    }
    if (!grads[i].all_finite()) {
      throw std::invalid_argument("adam_step: non-finite gradient");
    }
  }

  const double norm = global_norm(grads);
  const double clip = (max_grad_norm > 0.0 && norm > max_grad_norm) ? max_grad_norm / norm : 1.0;

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = clip * g[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace mfpg
