// SPDX-License-Identifier: Apache-2.0
#include "mfpg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfpg {

int Tape::push_node(Op op, int rows, int cols, int p0, int p1) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  n.val_off = static_cast<int>(vals_.size());
  n.p0 = p0;
  n.p1 = p1;
  const std::size_t sz = static_cast<std::size_t>(rows) * cols;
  vals_.resize(vals_.size() + sz, 0.0);
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

const Tape::Node& Tape::node(Value v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::invalid_argument("Tape: invalid node handle");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

void Tape::check_open(const char* what) const {
  if (consumed_) {
    throw std::logic_error(std::string("Tape: ") + what + " after backward(); call reset() first");
  }
}

void Tape::check_same_size(Value a, Value b, const char* what) const {
  if (size_of(node(a)) != size_of(node(b))) {
    throw std::invalid_argument(std::string("Tape: size mismatch in ") + what);
  }
}

Value Tape::leaf(const Tensor& t) {
  check_open("leaf");
  if (!t.all_finite()) throw std::invalid_argument("Tape: non-finite leaf values");
  const int id = push_node(Op::kLeaf, static_cast<int>(t.rows()), static_cast<int>(t.cols()));
  std::copy(t.data().begin(), t.data().end(), vals(nodes_[id]).begin());
  return {id};
}

Value Tape::constant(std::span<const double> values) {
  check_open("constant");
  const int id = push_node(Op::kConst, static_cast<int>(values.size()), 1);
  std::copy(values.begin(), values.end(), vals(nodes_[id]).begin());
  return {id};
}

Value Tape::constant_scalar(double v) { return constant(std::span<const double>(&v, 1)); }

Value Tape::add(Value a, Value b) {
  check_open("add");
  check_same_size(a, b, "add");
  const Node na = node(a);
  const Node nb = node(b);
  const int id = push_node(Op::kAdd, na.rows, na.cols, a.id, b.id);
  auto out = vals(nodes_[id]);
  auto va = vals(na), vb = vals(nb);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
  return {id};
}

Value Tape::sub(Value a, Value b) {
  check_open("sub");
  check_same_size(a, b, "sub");
  const Node na = node(a);
  const Node nb = node(b);
  const int id = push_node(Op::kSub, na.rows, na.cols, a.id, b.id);
  auto out = vals(nodes_[id]);
  auto va = vals(na), vb = vals(nb);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
  return {id};
}

Value Tape::mul(Value a, Value b) {
  check_open("mul");
  check_same_size(a, b, "mul");
  const Node na = node(a);
  const Node nb = node(b);
  const int id = push_node(Op::kMul, na.rows, na.cols, a.id, b.id);
  auto out = vals(nodes_[id]);
  auto va = vals(na), vb = vals(nb);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
  return {id};
}

Value Tape::scale(Value a, double c) {
  check_open("scale");
  const Node na = node(a);
  const int id = push_node(Op::kScale, na.rows, na.cols, a.id);
  nodes_[id].c0 = c;
  auto out = vals(nodes_[id]);
  auto va = vals(na);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * va[i];
  return {id};
}

Value Tape::offset(Value a, double c) {
  check_open("offset");
  const Node na = node(a);
  const int id = push_node(Op::kOffset, na.rows, na.cols, a.id);
  nodes_[id].c0 = c;
  auto out = vals(nodes_[id]);
  auto va = vals(na);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + c;
  return {id};
}

Value Tape::tanh(Value a) {
  check_open("tanh");
  const Node na = node(a);
  const int id = push_node(Op::kTanh, na.rows, na.cols, a.id);
  auto out = vals(nodes_[id]);
  auto va = vals(na);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(va[i]);
  return {id};
}

Value Tape::exp(Value a) {
  check_open("exp");
  const Node na = node(a);
  const int id = push_node(Op::kExp, na.rows, na.cols, a.id);
  auto out = vals(nodes_[id]);
  auto va = vals(na);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(va[i]);
  return {id};
}

Value Tape::log(Value a) {
  check_open("log");
  const Node na = node(a);
  const int id = push_node(Op::kLog, na.rows, na.cols, a.id);
  auto out = vals(nodes_[id]);
  auto va = vals(na);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(va[i]);
  return {id};
}

Value Tape::square(Value a) {
  check_open("square");
  const Node na = node(a);
  const int id = push_node(Op::kSquare, na.rows, na.cols, a.id);
  auto out = vals(nodes_[id]);
  auto va = vals(na);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * va[i];
  return {id};
}

Value Tape::clamp(Value a, double lo, double hi) {
  check_open("clamp");
  if (!(lo <= hi)) throw std::invalid_argument("Tape: clamp bounds out of order");
  const Node na = node(a);
  const int id = push_node(Op::kClamp, na.rows, na.cols, a.id);
  nodes_[id].c0 = lo;
  nodes_[id].c1 = hi;
  auto out = vals(nodes_[id]);
  auto va = vals(na);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(hi, std::max(lo, va[i]));
  return {id};
}

Value Tape::matvec(Value w, Value x) {
  check_open("matvec");
  const Node nw = node(w);
  const Node nx = node(x);
  if (nx.cols != 1 || nw.cols != nx.rows) {
    throw std::invalid_argument("Tape: matvec shape mismatch");
  }
  const int id = push_node(Op::kMatVec, nw.rows, 1, w.id, x.id);
  auto out = vals(nodes_[id]);
  auto vw = vals(nw);
  auto vx = vals(nx);
  const int m = nw.rows, n = nw.cols;
  for (int r = 0; r < m; ++r) {
    double acc = 0.0;
    const double* row = vw.data() + static_cast<std::size_t>(r) * n;
    for (int c = 0; c < n; ++c) acc += row[c] * vx[c];
    out[r] = acc;
  }
  return {id};
}

Value Tape::slice(Value a, int off, int len) {
  check_open("slice");
  const Node na = node(a);
  if (off < 0 || len < 1 || off + len > static_cast<int>(size_of(na))) {
    throw std::invalid_argument("Tape: slice out of range");
  }
  const int id = push_node(Op::kSlice, len, 1, a.id);
  nodes_[id].aux_off = off;
  auto out = vals(nodes_[id]);
  auto va = vals(na);
  for (int i = 0; i < len; ++i) out[i] = va[off + i];
  return {id};
}

Value Tape::sum(Value a) {
  check_open("sum");
  const Node na = node(a);
  const int id = push_node(Op::kSum, 1, 1, a.id);
  double acc = 0.0;
  for (double v : vals(na)) acc += v;
  vals(nodes_[id])[0] = acc;
  return {id};
}

Value Tape::mean(Value a) {
  check_open("mean");
  const Node na = node(a);
  const int id = push_node(Op::kMean, 1, 1, a.id);
  double acc = 0.0;
  auto va = vals(na);
  for (double v : va) acc += v;
  vals(nodes_[id])[0] = acc / static_cast<double>(va.size());
  return {id};
}

Value Tape::dot(Value a, Value b) {
  check_open("dot");
  check_same_size(a, b, "dot");
  const Node na = node(a);
  const Node nb = node(b);
  const int id = push_node(Op::kDot, 1, 1, a.id, b.id);
  double acc = 0.0;
  auto va = vals(na), vb = vals(nb);
  for (std::size_t i = 0; i < va.size(); ++i) acc += va[i] * vb[i];
  vals(nodes_[id])[0] = acc;
  return {id};
}

Value Tape::log_sum_exp(Value a) {
  check_open("log_sum_exp");
  const Node na = node(a);
  const int id = push_node(Op::kLogSumExp, 1, 1, a.id);
  auto va = vals(na);
  double mx = va[0];
  for (double v : va) mx = std::max(mx, v);
  double acc = 0.0;
  for (double v : va) acc += std::exp(v - mx);
  vals(nodes_[id])[0] = mx + std::log(acc);
  return {id};
}

Value Tape::weighted_sum(std::span<const Value> scalars, std::span<const double> weights) {
  check_open("weighted_sum");
  if (scalars.size() != weights.size() || scalars.empty()) {
    throw std::invalid_argument("Tape: weighted_sum needs equal, nonzero arity");
  }
  for (Value v : scalars) {
    if (size_of(node(v)) != 1) throw std::invalid_argument("Tape: weighted_sum expects scalars");
  }
  const int aux_off = static_cast<int>(aux_ints_.size());
  const int w_off = static_cast<int>(aux_doubles_.size());
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    aux_ints_.push_back(scalars[i].id);
    aux_doubles_.push_back(weights[i]);
  }
  const int id = push_node(Op::kWeightedSum, 1, 1);
  nodes_[id].aux_off = aux_off;
  nodes_[id].aux_len = static_cast<int>(scalars.size());
  nodes_[id].c0 = static_cast<double>(w_off);
  double acc = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    acc += weights[i] * vals(node(scalars[i]))[0];
  }
  vals(nodes_[id])[0] = acc;
  return {id};
}

Value Tape::mean_of(std::span<const Value> scalars) {
  std::vector<double> w(scalars.size(), 1.0 / static_cast<double>(scalars.size()));
  return weighted_sum(scalars, w);
}

double Tape::value(Value v) const {
  const Node& n = node(v);
  if (size_of(n) != 1) throw std::invalid_argument("Tape: value() on non-scalar node");
  return vals(n)[0];
}

std::span<const double> Tape::values(Value v) const { return vals(node(v)); }

std::span<const double> Tape::grad(Value v) const {
  if (!consumed_) throw std::logic_error("Tape: grad() before backward()");
  const Node& n = node(v);
  return {grads_.data() + n.val_off, size_of(n)};
}

void Tape::backward(Value loss) {
  if (consumed_) throw std::logic_error("Tape: backward() on a consumed graph");
  const Node& ln = node(loss);
  if (size_of(ln) != 1) throw std::invalid_argument("Tape: backward() requires a scalar loss");
  grads_.assign(vals_.size(), 0.0);  // grown lazily, only here
  grads_[ln.val_off] = 1.0;
  consumed_ = true;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    const std::size_t sz = size_of(n);
    const double* g = grads_.data() + n.val_off;
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
        break;
      case Op::kAdd: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        double* gb = grads_.data() + nodes_[n.p1].val_off;
        for (std::size_t i = 0; i < sz; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        double* gb = grads_.data() + nodes_[n.p1].val_off;
        for (std::size_t i = 0; i < sz; ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::kMul: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        double* gb = grads_.data() + nodes_[n.p1].val_off;
        const double* va = vals_.data() + nodes_[n.p0].val_off;
        const double* vb = vals_.data() + nodes_[n.p1].val_off;
        for (std::size_t i = 0; i < sz; ++i) {
          ga[i] += g[i] * vb[i];
          gb[i] += g[i] * va[i];
        }
        break;
      }
      case Op::kScale: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        for (std::size_t i = 0; i < sz; ++i) ga[i] += n.c0 * g[i];
        break;
      }
      case Op::kOffset: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        for (std::size_t i = 0; i < sz; ++i) ga[i] += g[i];
        break;
      }
      case Op::kTanh: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        const double* y = vals_.data() + n.val_off;
        for (std::size_t i = 0; i < sz; ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::kExp: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        const double* y = vals_.data() + n.val_off;
        for (std::size_t i = 0; i < sz; ++i) ga[i] += g[i] * y[i];
        break;
      }
      case Op::kLog: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        const double* x = vals_.data() + nodes_[n.p0].val_off;
        for (std::size_t i = 0; i < sz; ++i) {
          if (g[i] != 0.0) ga[i] += g[i] / x[i];
        }
        break;
      }
      case Op::kSquare: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        const double* x = vals_.data() + nodes_[n.p0].val_off;
        for (std::size_t i = 0; i < sz; ++i) ga[i] += 2.0 * g[i] * x[i];
        break;
      }
      case Op::kClamp: {
        double* ga = grads_.data() + nodes_[n.p0].val_off;
        const double* x = vals_.data() + nodes_[n.p0].val_off;
        for (std::size_t i = 0; i < sz; ++i) {
          if (x[i] > n.c0 && x[i] < n.c1) ga[i] += g[i];
        }
        break;
      }
      case Op::kMatVec: {
        const Node& nw = nodes_[n.p0];
        const Node& nx = nodes_[n.p1];
        double* gw = grads_.data() + nw.val_off;
        double* gx = grads_.data() + nx.val_off;
        const double* vw = vals_.data() + nw.val_off;
        const double* vx = vals_.data() + nx.val_off;
        const int m = nw.rows, k = nw.cols;
        for (int r = 0; r < m; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          double* gwrow = gw + static_cast<std::size_t>(r) * k;
          const double* vwrow = vw + static_cast<std::size_t>(r) * k;
          for (int c = 0; c < k; ++c) {
            gwrow[c] += gr * vx[c];
            gx[c] += gr * vwrow[c];
          }
        }
        break;
      }
      case Op::kSlice: {
        double* ga = grads_.data() + nodes_[n.p0].val_off + n.aux_off;
        for (std::size_t i = 0; i < sz; ++i) ga[i] += g[i];
        break;
      }
      case Op::kSum: {
        const Node& na = nodes_[n.p0];
        double* ga = grads_.data() + na.val_off;
        const double g0 = g[0];
        for (std::size_t i = 0; i < size_of(na); ++i) ga[i] += g0;
        break;
      }
      case Op::kMean: {
        const Node& na = nodes_[n.p0];
        double* ga = grads_.data() + na.val_off;
        const double g0 = g[0] / static_cast<double>(size_of(na));
        for (std::size_t i = 0; i < size_of(na); ++i) ga[i] += g0;
        break;
      }
      case Op::kDot: {
        const Node& na = nodes_[n.p0];
        const Node& nb = nodes_[n.p1];
        double* ga = grads_.data() + na.val_off;
        double* gb = grads_.data() + nb.val_off;
        const double* va = vals_.data() + na.val_off;
        const double* vb = vals_.data() + nb.val_off;
        const double g0 = g[0];
        for (std::size_t i = 0; i < size_of(na); ++i) {
          ga[i] += g0 * vb[i];
          gb[i] += g0 * va[i];
        }
        break;
      }
      case Op::kLogSumExp: {
        const Node& na = nodes_[n.p0];
        double* ga = grads_.data() + na.val_off;
        const double* x = vals_.data() + na.val_off;
        const double y = vals_[n.val_off];
        const double g0 = g[0];
        for (std::size_t i = 0; i < size_of(na); ++i) ga[i] += g0 * std::exp(x[i] - y);
        break;
      }
      case Op::kWeightedSum: {
        const double g0 = g[0];
        const int w_off = static_cast<int>(n.c0);
        for (int i = 0; i < n.aux_len; ++i) {
          const int pid = aux_ints_[n.aux_off + i];
          grads_[nodes_[pid].val_off] += g0 * aux_doubles_[w_off + i];
        }
        break;
      }
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  vals_.clear();
  grads_.clear();
  aux_ints_.clear();
  aux_doubles_.clear();
  consumed_ = false;
}

}  // namespace mfpg
