#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dfept/autodiff.hpp"
#include "dfept/gnn.hpp"

namespace dfept {

enum class PoolMode { Sum, Max, Mean, United };
enum class PeMode { PostPool, PerNode, Off };

std::string_view to_string(PoolMode mode);
std::string_view to_string(PeMode mode);
PoolMode parse_pool_mode(std::string_view tag);
PeMode parse_pe_mode(std::string_view tag);

/// Gated node readout: e_v = sigmoid(h_v Wg + bg) * relu(h_v Wt + bt).
template <class T>
struct AttentionReadout {
  Parameter<T> gate_w, gate_b, trans_w, trans_b;

  static AttentionReadout init(std::size_t width, std::uint64_t seed) {
    if (width == 0) throw Error(ErrorKind::InvalidDimension, "zero readout width");
    Rng rng(seed);
    AttentionReadout r;
    r.gate_w = {"att.gate_w", glorot_uniform<T>(width, width, rng)};
    r.gate_b = {"att.gate_b", Matrix<T>(1, width)};
    r.trans_w = {"att.trans_w", glorot_uniform<T>(width, width, rng)};
    r.trans_b = {"att.trans_b", Matrix<T>(1, width)};
    return r;
  }

  std::size_t width() const { return gate_w.value.rows(); }

  void validate() const {
    const std::size_t d = width();
    require_shape(gate_w.value, d, d, "att.gate_w");
    require_shape(trans_w.value, d, d, "att.trans_w");
    require_shape(gate_b.value, 1, d, "att.gate_b");
    require_shape(trans_b.value, 1, d, "att.trans_b");
  }
};

template <class T>
struct GraphVector {
  std::vector<T> values;
  std::size_t n_nodes = 0;
  bool pe_applied = false;
};

template <class T>
Var<T> attend_nodes(Var<T> h, AttentionReadout<T>& r, bool trainable = true) {
  r.validate();
  if (h.cols() != r.width())
    throw Error(ErrorKind::ShapeError, "readout width " + std::to_string(r.width()) + " for node states of width " +
                                           std::to_string(h.cols()));
  Tape<T>& t = *h.tape;
  Var<T> gate = ad::sigmoid(ad::add_row(ad::matmul(h, t.parameter(r.gate_w, trainable)), t.parameter(r.gate_b, trainable)));
  Var<T> trans =
      ad::relu(ad::add_row(ad::matmul(h, t.parameter(r.trans_w, trainable)), t.parameter(r.trans_b, trainable)));
  return ad::hadamard(gate, trans);
}

template <class T>
Matrix<T> attend_nodes(const Matrix<T>& h, AttentionReadout<T>& r) {
  Tape<T> t;
  return attend_nodes(t.constant(h), r, false).value();
}

/// Collapse per-node vectors to one row. United is (sum over nodes) * (max over nodes).
template <class T>
Var<T> pool(Var<T> e, PoolMode mode) {
  if (e.rows() == 0) throw Error(ErrorKind::EmptyGraph, "pooling a graph with no nodes");
  switch (mode) {
    case PoolMode::Sum: return ad::sum_rows(e);
    case PoolMode::Max: return ad::max_rows(e);
    case PoolMode::Mean: return ad::mean_rows(e);
    case PoolMode::United: return ad::hadamard(ad::sum_rows(e), ad::max_rows(e));
  }
  throw Error(ErrorKind::ContractViolation, "bad pool mode");
}

template <class T>
GraphVector<T> pool(const Matrix<T>& e, PoolMode mode) {
  Tape<T> t;
  Var<T> g = pool(t.constant(e), mode);
  return {g.value().data(), e.rows(), false};
}

/// Sinusoidal encoder. Row `pos` of the table is sin(pos / base^(2i/d)) at 2i
/// and cos(pos / base^(2i/d)) at 2i+1.
struct PositionalEncoder {
  double base = 10000.0;
  std::size_t width = 0;
  PeMode mode = PeMode::PostPool;

  /// Offset added to a pooled vector; element index j is its own position:
  /// P[2i] = sin(2i / base^(2i/d)), P[2i+1] = cos((2i+1) / base^(2i/d)).
  std::vector<double> post_pool_offset() const {
    std::vector<double> p(width);
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t pair = j - (j % 2);
      const double denom = std::pow(base, static_cast<double>(pair) / static_cast<double>(width));
      const double pos = static_cast<double>(j);
      p[j] = j % 2 == 0 ? std::sin(pos / denom) : std::cos(pos / denom);
    }
    return p;
  }

  /// One encoding row per node position, for adding to node features before message passing.
  Matrix<double> node_rows(std::size_t n) const {
    Matrix<double> m(n, width);
    for (std::size_t pos = 0; pos < n; ++pos)
      for (std::size_t j = 0; j < width; ++j) {
        const std::size_t pair = j - (j % 2);
        const double angle =
            static_cast<double>(pos) / std::pow(base, static_cast<double>(pair) / static_cast<double>(width));
        m(pos, j) = j % 2 == 0 ? std::sin(angle) : std::cos(angle);
      }
    return m;
  }
};

/// Apply the encoder to a pooled vector. PerNode and Off leave it untouched
/// (per-node encoding happens on node features upstream).
template <class T>
GraphVector<T> positional_encode(GraphVector<T> g, const PositionalEncoder& enc) {
  if (enc.mode != PeMode::PostPool) return g;
  if (g.pe_applied) throw Error(ErrorKind::ContractViolation, "positional encoding already applied");
  if (g.values.size() != enc.width)
    throw Error(ErrorKind::ShapeError, "encoder width " + std::to_string(enc.width) + " for graph vector of width " +
                                           std::to_string(g.values.size()));
  const auto p = enc.post_pool_offset();
  for (std::size_t j = 0; j < g.values.size(); ++j) g.values[j] += static_cast<T>(p[j]);
  g.pe_applied = true;
  return g;
}

}  // namespace dfept
