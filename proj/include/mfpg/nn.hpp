// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "mfpg/autodiff.hpp"
#include "mfpg/rng.hpp"
#include "mfpg/tensor.hpp"

namespace mfpg {

/// Feedforward network: tanh on hidden layers, linear output head.
/// Parameters are stored as [W0, b0, W1, b1, ...]; weights are initialized
/// uniformly in +-1/sqrt(fan_in), biases at zero.
struct Mlp {
  int input_dim = 0;
  int output_dim = 0;
  std::vector<int> hidden;           // hidden layer widths; may be empty
  std::vector<Tensor> params;        // interleaved weights and biases

  static Mlp make(int input_dim, std::vector<int> hidden, int output_dim, Rng& rng);

  std::size_t layer_count() const { return hidden.size() + 1; }
  const Tensor& weight(std::size_t layer) const { return params[2 * layer]; }
  const Tensor& bias(std::size_t layer) const { return params[2 * layer + 1]; }

  std::size_t parameter_count() const;

  /// Plain forward pass, no graph. `scratch` is reused between calls.
  void forward(std::span<const double> input, std::vector<double>& out,
               std::vector<double>& scratch) const;
  std::vector<double> forward(std::span<const double> input) const;
};

/// Leaf handles for one Mlp registered on a tape.
struct MlpVars {
  std::vector<Value> params;  // same interleaving as Mlp::params
};

MlpVars register_mlp(Tape& tape, const Mlp& mlp);

/// Forward pass recorded on the tape; returns the (vector) output node.
Value mlp_forward(Tape& tape, const Mlp& mlp, const MlpVars& vars, std::span<const double> input);

/// Copies leaf gradients of `vars` into tensors shaped like `mlp.params`.
std::vector<Tensor> collect_gradients(const Tape& tape, const Mlp& mlp, const MlpVars& vars);

}  // namespace mfpg
