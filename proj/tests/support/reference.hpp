#pragma once

// Dense double-precision re-implementations used as test oracles. They do not
// touch the tape or NormalizedAdjacency, only nested vectors and loops.

#include <cmath>
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "dfept/gnn.hpp"
#include "dfept/matrix.hpp"
#include "dfept/rng.hpp"

namespace dfept::testing::ref {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense mul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Dense out = zeros(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0;
      for (std::size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      out[i][j] = s;
    }
  return out;
}

inline Dense add(const Dense& a, const Dense& b) {
  Dense out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] += b[i][j];
  return out;
}

inline double relu(double x) { return x > 0 ? x : 0; }
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <class F>
Dense map(const Dense& a, F f) {
  Dense out = a;
  for (auto& row : out)
    for (double& v : row) v = f(v);
  return out;
}

template <class T>
Dense dense(const Matrix<T>& m) {
  Dense out = zeros(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = static_cast<double>(m(i, j));
  return out;
}

template <class T>
Matrix<T> matrix(const Dense& d) {
  Matrix<T> m(d.size(), d.empty() ? 0 : d[0].size());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = static_cast<T>(d[i][j]);
  return m;
}

/// Textbook renormalized adjacency built from the 0/1 matrix.
inline Dense adjacency(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                       AdjacencyMode mode) {
  Dense a = zeros(n, n);
  for (auto [s, d] : edges) a[s][d] = 1.0;
  Dense m = zeros(n, n);
  if (mode == AdjacencyMode::Symmetric) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = (i == j || a[i][j] > 0 || a[j][i] > 0) ? 1.0 : 0.0;
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) deg[i] += m[i][j];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] /= std::sqrt(deg[i] * deg[j]);
  } else {
    // row v collects v and its in-neighbours u (edge u -> v)
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t u = 0; u < n; ++u) m[v][u] = (u == v || a[u][v] > 0) ? 1.0 : 0.0;
    for (auto& row : m) {
      double s = 0;
      for (double x : row) s += x;
      for (double& x : row) x /= s;
    }
  }
  return m;
}

inline Dense gcn(Dense h, const Dense& adj, const std::vector<Dense>& weights, const std::vector<Dense>& biases = {}) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    Dense z = mul(mul(adj, h), weights[k]);
    if (!biases.empty())
      for (auto& row : z)
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += biases[k][0][j];
    h = map(z, relu);
  }
  return h;
}

struct GgnnWeights {
  Dense wz, uz, wr, ur, wo, uo;
};

inline Dense ggnn(Dense h, const Dense& adj, const GgnnWeights& w, std::size_t steps) {
  for (std::size_t k = 0; k < steps; ++k) {
    const Dense a = mul(adj, h);
    const Dense z = map(add(mul(a, w.wz), mul(h, w.uz)), logistic);
    const Dense r = map(add(mul(a, w.wr), mul(h, w.ur)), logistic);
    Dense rh = h;
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = 0; j < h[i].size(); ++j) rh[i][j] = r[i][j] * h[i][j];
    const Dense cand = map(add(mul(a, w.wo), mul(rh, w.uo)), relu);
    Dense next = h;
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = 0; j < h[i].size(); ++j) next[i][j] = (1 - z[i][j]) * h[i][j] + z[i][j] * cand[i][j];
    h = std::move(next);
  }
  return h;
}

template <class T>
GgnnWeights ggnn_weights(const GgnnCell<T>& c) {
  return {dense(c.w_update.value), dense(c.u_update.value), dense(c.w_reset.value),
          dense(c.u_reset.value),  dense(c.w_out.value),    dense(c.u_out.value)};
}

struct RandomGraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Directed graph without self-loops; each ordered pair present with probability p.
inline RandomGraph random_graph(Rng& rng, std::size_t min_n, std::size_t max_n, double p = 0.3) {
  RandomGraph g;
  g.n = min_n + rng.below(max_n - min_n + 1);
  for (std::size_t u = 0; u < g.n; ++u)
    for (std::size_t v = 0; v < g.n; ++v)
      if (u != v && rng.uniform01() < p) g.edges.emplace_back(u, v);
  return g;
}

inline Dense random_dense(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  Dense d = zeros(r, c);
  for (auto& row : d)
    for (double& v : row) v = rng.uniform(lo, hi);
  return d;
}

/// Hop distances in the symmetrized graph; unreachable = n + 1.
inline std::vector<std::vector<std::size_t>> hop_distances(const RandomGraph& g) {
  const std::size_t inf = g.n + 1;
  std::vector<std::vector<std::size_t>> d(g.n, std::vector<std::size_t>(g.n, inf));
  for (std::size_t i = 0; i < g.n; ++i) d[i][i] = 0;
  for (auto [s, t] : g.edges) d[s][t] = d[t][s] = std::min<std::size_t>(d[s][t], 1);
  for (std::size_t k = 0; k < g.n; ++k)
    for (std::size_t i = 0; i < g.n; ++i)
      for (std::size_t j = 0; j < g.n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline double max_relative_error(const Dense& a, const Dense& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      const double scale = std::max({std::abs(a[i][j]), std::abs(b[i][j]), 1e-6});
      worst = std::max(worst, std::abs(a[i][j] - b[i][j]) / scale);
    }
  return worst;
}

}  // namespace dfept::testing::ref
