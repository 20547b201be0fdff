// SPDX-License-Identifier: Apache-2.0
#include "mfpg/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace mfpg {

Mlp Mlp::make(int input_dim, std::vector<int> hidden, int output_dim, Rng& rng) {
  if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("Mlp: bad dimensions");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("Mlp: bad hidden width");
  }
  Mlp m;
  m.input_dim = input_dim;
  m.output_dim = output_dim;
  m.hidden = std::move(hidden);

  int fan_in = input_dim;
  auto add_layer = [&](int fan_out) {
    Tensor w({static_cast<std::size_t>(fan_out), static_cast<std::size_t>(fan_in)});
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    m.params.push_back(std::move(w));
    m.params.emplace_back(std::vector<std::size_t>{static_cast<std::size_t>(fan_out)});
    fan_in = fan_out;
  };
  for (int h : m.hidden) add_layer(h);
  add_layer(output_dim);
  return m;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : params) n += t.size();
  return n;
}

void Mlp::forward(std::span<const double> input, std::vector<double>& out,
                  std::vector<double>& scratch) const {
  if (static_cast<int>(input.size()) != input_dim) {
    throw std::invalid_argument("Mlp: input dimension mismatch");
  }
  scratch.assign(input.begin(), input.end());
  const std::size_t layers = layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = weight(l);
    const Tensor& b = bias(l);
    const int m = static_cast<int>(w.rows()), k = static_cast<int>(w.cols());
    out.resize(static_cast<std::size_t>(m));
    const double* wd = w.data().data();
    for (int r = 0; r < m; ++r) {
      double acc = b[static_cast<std::size_t>(r)];
      const double* row = wd + static_cast<std::size_t>(r) * k;
      for (int c = 0; c < k; ++c) acc += row[c] * scratch[static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(r)] = (l + 1 < layers) ? std::tanh(acc) : acc;
    }
    if (l + 1 < layers) scratch.swap(out);
  }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  std::vector<double> out, scratch;
  forward(input, out, scratch);
  return out;
}

MlpVars register_mlp(Tape& tape, const Mlp& mlp) {
  MlpVars vars;
  vars.params.reserve(mlp.params.size());
  for (const Tensor& t : mlp.params) vars.params.push_back(tape.leaf(t));
  return vars;
}

Value mlp_forward(Tape& tape, const Mlp& mlp, const MlpVars& vars, std::span<const double> input) {
  if (static_cast<int>(input.size()) != mlp.input_dim) {
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  }
  Value x = tape.constant(input);
  const std::size_t layers = mlp.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    Value z = tape.add(tape.matvec(vars.params[2 * l], x), vars.params[2 * l + 1]);
    x = (l + 1 < layers) ? tape.tanh(z) : z;
  }
  return x;
}

std::vector<Tensor> collect_gradients(const Tape& tape, const Mlp& mlp, const MlpVars& vars) {
  std::vector<Tensor> grads;
  grads.reserve(mlp.params.size());
  for (std::size_t i = 0; i < mlp.params.size(); ++i) {
    Tensor g(mlp.params[i].shape());
    auto src = tape.grad(vars.params[i]);
    std::copy(src.begin(), src.end(), g.data().begin());
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace mfpg
