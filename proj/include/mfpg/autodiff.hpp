// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "mfpg/tensor.hpp"

namespace mfpg {

/// Handle to a node on a Tape. Scalars are nodes with a single element;
/// every loss handed to backward() is one of those.
struct Value {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Tape-based reverse-mode differentiation over small vectors/matrices.
///
/// Nodes are appended in evaluation order, which is therefore a topological
/// order; backward() walks the tape once in reverse. All node payloads live
/// in flat arenas owned by the tape, so reset() keeps capacity and graph
/// construction does not allocate per node in steady state.
///
/// Usage per iteration: register parameter leaves, build the loss,
/// call backward(loss), read leaf gradients, reset().
class Tape {
 public:
  Tape() = default;

  // ---- graph construction -------------------------------------------------

  /// Registers a parameter leaf. The tensor's values are copied in; after
  /// backward(), grad(v) holds d loss / d leaf.
  Value leaf(const Tensor& t);

  /// A constant vector; participates in the graph but no gradient is kept.
  Value constant(std::span<const double> values);
  Value constant_scalar(double v);

  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);  // elementwise
  Value scale(Value a, double c);
  Value offset(Value a, double c);
  Value neg(Value a) { return scale(a, -1.0); }

  Value tanh(Value a);
  Value exp(Value a);
  Value log(Value a);
  Value square(Value a);
  /// Clamp with pass-through gradient strictly inside [lo, hi], zero outside.
  Value clamp(Value a, double lo, double hi);

  /// Matrix-vector product. `w` must be a matrix leaf/node of shape (m, n),
  /// `x` a vector of length n; result has length m.
  Value matvec(Value w, Value x);

  Value slice(Value a, int offset, int len);
  Value pick(Value a, int index) { return slice(a, index, 1); }

  Value sum(Value a);
  Value mean(Value a);
  Value dot(Value a, Value b);
  /// Numerically stable log(sum(exp(a))).
  Value log_sum_exp(Value a);

  /// sum_i weights[i] * scalars[i]; all inputs must be scalar nodes.
  Value weighted_sum(std::span<const Value> scalars, std::span<const double> weights);
  /// Mean of scalar nodes.
  Value mean_of(std::span<const Value> scalars);

  // ---- evaluation / differentiation ---------------------------------------

  double value(Value v) const;
  std::span<const double> values(Value v) const;

  /// Reverse pass from a scalar loss. The graph is consumed: calling
  /// backward() again before reset() is a usage error.
  void backward(Value loss);

  /// Gradient of the last backward() w.r.t. a node (typically a leaf).
  std::span<const double> grad(Value v) const;

  /// Clears the graph, keeping arena capacity.
  void reset();

  bool consumed() const { return consumed_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kConst,
    kAdd,
    kSub,
    kMul,
    kScale,
    kOffset,
    kTanh,
    kExp,
    kLog,
    kSquare,
    kClamp,
    kMatVec,
    kSlice,
    kSum,
    kMean,
    kDot,
    kLogSumExp,
    kWeightedSum,
  };

  struct Node {
    Op op;
    int rows;
    int cols;
    int val_off;  // into vals_/grads_
    int p0 = -1;
    int p1 = -1;
    int aux_off = 0;  // variable-arity parents (kWeightedSum) / slice offset
    int aux_len = 0;
    double c0 = 0.0;  // op constants (scale factor, clamp bounds, weights offset)
    double c1 = 0.0;
  };

  int push_node(Op op, int rows, int cols, int p0 = -1, int p1 = -1);
  const Node& node(Value v) const;
  void check_open(const char* what) const;
  void check_same_size(Value a, Value b, const char* what) const;

  std::span<double> vals(const Node& n) { return {vals_.data() + n.val_off, size_of(n)}; }
  std::span<const double> vals(const Node& n) const { return {vals_.data() + n.val_off, size_of(n)}; }
  std::span<double> grads(const Node& n) { return {grads_.data() + n.val_off, size_of(n)}; }
  static std::size_t size_of(const Node& n) { return static_cast<std::size_t>(n.rows) * n.cols; }

  std::vector<Node> nodes_;
  std::vector<double> vals_;
  std::vector<double> grads_;
  std::vector<int> aux_ints_;
  std::vector<double> aux_doubles_;
  bool consumed_ = false;
};

}  // namespace mfpg
