#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dfept/autodiff.hpp"
#include "dfept/dfg.hpp"
#include "dfept/rng.hpp"

namespace dfept {

enum class AdjacencyMode { Symmetric, DirectedRow };

std::string_view to_string(AdjacencyMode mode);
AdjacencyMode parse_adjacency_mode(std::string_view tag);

/// Propagation operator with self-loops.
///
/// Symmetric:   D^-1/2 (A_sym + I) D^-1/2, A_sym = A or A^T, D = degree + 1.
/// DirectedRow: row v averages v itself and every u with an edge u -> v.
struct NormalizedAdjacency {
  std::size_t n = 0;
  AdjacencyMode mode = AdjacencyMode::Symmetric;
  /// rows[v] = (u, a_vu) sorted by u.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  Matrix<double> dense() const;

  template <class T>
  std::shared_ptr<const SparseRows<T>> as_sparse() const {
    auto s = std::make_shared<SparseRows<T>>();
    s->cols = n;
    s->rows.resize(n);
    for (std::size_t v = 0; v < n; ++v)
      for (const auto& [u, w] : rows[v]) s->rows[v].emplace_back(u, static_cast<T>(w));
    return s;
  }
};

NormalizedAdjacency normalize_adjacency(std::size_t n, const std::vector<DfgEdge>& edges, AdjacencyMode mode);
NormalizedAdjacency normalize_adjacency(const DataFlowGraph& dfg, AdjacencyMode mode);

/// Glorot-uniform matrix: entries on +-sqrt(6 / (rows + cols)).
template <class T>
Matrix<T> glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix<T> m(rows, cols);
  for (T& v : m.data()) v = static_cast<T>(rng.uniform(-limit, limit));
  return m;
}

/// Stack of graph convolutions H <- ReLU(A H W (+ b)).
template <class T>
struct GcnStack {
  std::vector<Parameter<T>> weights;
  /// Empty unless the stack was built with biases.
  std::vector<Parameter<T>> biases;

  static GcnStack init(const std::vector<std::size_t>& widths, std::uint64_t seed, bool bias = false) {
    if (widths.size() < 2) throw Error(ErrorKind::InvalidDimension, "GCN needs at least one layer");
    GcnStack s;
    Rng rng(seed);
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
      if (widths[k] == 0 || widths[k + 1] == 0) throw Error(ErrorKind::InvalidDimension, "zero GCN width");
      s.weights.emplace_back("gcn.w" + std::to_string(k), glorot_uniform<T>(widths[k], widths[k + 1], rng));
      if (bias) s.biases.emplace_back("gcn.b" + std::to_string(k), Matrix<T>(1, widths[k + 1]));
    }
    return s;
  }

  std::size_t depth() const { return weights.size(); }
  std::size_t in_width() const { return weights.front().value.rows(); }
  std::size_t out_width() const { return weights.back().value.cols(); }

  void validate() const {
    for (std::size_t k = 0; k + 1 < weights.size(); ++k)
      if (weights[k].value.cols() != weights[k + 1].value.rows())
        throw Error(ErrorKind::ShapeError, "GCN layer widths do not chain at layer " + std::to_string(k));
    if (!biases.empty() && biases.size() != weights.size())
      throw Error(ErrorKind::ShapeError, "GCN bias count does not match layer count");
  }
};

/// Gated graph recurrence with update gate z, reset gate r and a rectified candidate state.
template <class T>
struct GgnnCell {
  Parameter<T> w_update, u_update, w_reset, u_reset, w_out, u_out;
  std::size_t steps = 1;

  static GgnnCell init(std::size_t width, std::size_t steps, std::uint64_t seed) {
    if (width == 0) throw Error(ErrorKind::InvalidDimension, "zero GGNN width");
    if (steps == 0) throw Error(ErrorKind::InvalidDimension, "GGNN needs at least one step");
    Rng rng(seed);
    GgnnCell c;
    c.w_update = {"ggnn.wz", glorot_uniform<T>(width, width, rng)};
    c.u_update = {"ggnn.uz", glorot_uniform<T>(width, width, rng)};
    c.w_reset = {"ggnn.wr", glorot_uniform<T>(width, width, rng)};
    c.u_reset = {"ggnn.ur", glorot_uniform<T>(width, width, rng)};
    c.w_out = {"ggnn.wo", glorot_uniform<T>(width, width, rng)};
    c.u_out = {"ggnn.uo", glorot_uniform<T>(width, width, rng)};
    c.steps = steps;
    return c;
  }

  std::size_t width() const { return w_update.value.rows(); }

  void validate() const {
    const std::size_t d = width();
    for (const Parameter<T>* p : {&w_update, &u_update, &w_reset, &u_reset, &w_out, &u_out})
      require_shape(p->value, d, d, p->name.c_str());
    if (steps == 0) throw Error(ErrorKind::InvalidDimension, "GGNN needs at least one step");
  }
};

/// GCN over recorded node states. Weights are bound as trainable leaves when `trainable`.
template <class T>
Var<T> gcn_forward(Var<T> x, const NormalizedAdjacency& adj, GcnStack<T>& stack, bool trainable = true) {
  stack.validate();
  if (x.cols() != stack.in_width())
    throw Error(ErrorKind::ShapeError, "GCN input width " + std::to_string(x.cols()) + ", layer expects " +
                                           std::to_string(stack.in_width()));
  Tape<T>& t = *x.tape;
  auto s = adj.as_sparse<T>();
  Var<T> h = x;
  for (std::size_t k = 0; k < stack.depth(); ++k) {
    Var<T> z = ad::matmul(ad::propagate(s, h), t.parameter(stack.weights[k], trainable));
    if (!stack.biases.empty()) z = ad::add_row(z, t.parameter(stack.biases[k], trainable));
    h = ad::relu(z);
  }
  return h;
}

template <class T>
Matrix<T> gcn_forward(const Matrix<T>& x, const NormalizedAdjacency& adj, GcnStack<T>& stack) {
  Tape<T> t;
  return gcn_forward(t.constant(x), adj, stack, false).value();
}

/// `steps` rounds of the gated update over the same propagation operator as the GCN.
template <class T>
Var<T> ggnn_forward(Var<T> x, const NormalizedAdjacency& adj, GgnnCell<T>& cell, bool trainable = true) {
  cell.validate();
  if (x.cols() != cell.width())
    throw Error(ErrorKind::ShapeError, "GGNN input width " + std::to_string(x.cols()) + ", cell width " +
                                           std::to_string(cell.width()));
  Tape<T>& t = *x.tape;
  auto s = adj.as_sparse<T>();
  Var<T> wz = t.parameter(cell.w_update, trainable), uz = t.parameter(cell.u_update, trainable);
  Var<T> wr = t.parameter(cell.w_reset, trainable), ur = t.parameter(cell.u_reset, trainable);
  Var<T> wo = t.parameter(cell.w_out, trainable), uo = t.parameter(cell.u_out, trainable);
  Var<T> h = x;
  for (std::size_t k = 0; k < cell.steps; ++k) {
    Var<T> a = ad::propagate(s, h);
    Var<T> z = ad::sigmoid(ad::add(ad::matmul(a, wz), ad::matmul(h, uz)));
    Var<T> r = ad::sigmoid(ad::add(ad::matmul(a, wr), ad::matmul(h, ur)));
    Var<T> candidate = ad::relu(ad::add(ad::matmul(a, wo), ad::matmul(ad::hadamard(r, h), uo)));
    // h = (1 - z) * h + z * candidate
    h = ad::add(ad::hadamard(ad::affine(z, T{-1}, T{1}), h), ad::hadamard(z, candidate));
  }
  return h;
}

template <class T>
Matrix<T> ggnn_forward(const Matrix<T>& x, const NormalizedAdjacency& adj, GgnnCell<T>& cell) {
  Tape<T> t;
  return ggnn_forward(t.constant(x), adj, cell, false).value();
}

/// Reverse sweep from a scalar loss; gradients land in each bound Parameter::grad.
template <class T>
void backward(Tape<T>& tape, Var<T> loss) {
  tape.backward(loss);
}

}  // namespace dfept
