// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mfpg/tensor.hpp"

namespace mfpg {

/// Adam accumulator state. Moments are shaped like the parameters and start
/// at zero with step_count 0.
struct AdamState {
  std::int64_t step_count = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState like(const std::vector<Tensor>& params);
};

/// One bias-corrected Adam step with global gradient-norm clipping.
///
/// The gradient is scaled so its global L2 norm never exceeds
/// `max_grad_norm` before entering the moment updates. A non-finite gradient
/// throws and leaves parameters and state untouched.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               double lr, double max_grad_norm);

/// Global L2 norm across a set of tensors.
double global_norm(const std::vector<Tensor>& ts);

}  // namespace mfpg
