#pragma once

// Randomized property checks on the message-passing layers. Shared by the
// unit tests and the acceptance binary.

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>

#include "dfept/gnn.hpp"
#include "reference.hpp"

namespace dfept::testing {

struct CheckResult {
  bool pass = true;
  double worst = 0.0;
  std::size_t trials = 0;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

inline std::vector<std::pair<std::size_t, std::size_t>> as_pairs(const std::vector<DfgEdge>& e) { return {e.begin(), e.end()}; }

/// Max entrywise gap between the three two-node/one-node fixtures and their hand values.
inline CheckResult adjacency_fixtures() {
  CheckResult r;
  auto gap = [&](const Matrix<double>& got, const ref::Dense& want, const char* name) {
    if (got.rows() != want.size() || got.cols() != want[0].size()) return r.fail(std::string(name) + ": shape");
    for (std::size_t i = 0; i < want.size(); ++i)
      for (std::size_t j = 0; j < want[i].size(); ++j) r.worst = std::max(r.worst, std::abs(got(i, j) - want[i][j]));
    ++r.trials;
  };
  gap(normalize_adjacency(1, {}, AdjacencyMode::Symmetric).dense(), {{1.0}}, "isolated");
  gap(normalize_adjacency(2, {{0, 1}}, AdjacencyMode::Symmetric).dense(), {{0.5, 0.5}, {0.5, 0.5}}, "sym");
  gap(normalize_adjacency(2, {{0, 1}}, AdjacencyMode::DirectedRow).dense(), {{1.0, 0.0}, {0.5, 0.5}}, "row");
  if (r.worst > 1e-7) r.fail("fixture gap " + std::to_string(r.worst));
  return r;
}

/// Symmetric mode is symmetric and agrees with the dense textbook formula; row mode rows sum to 1.
inline CheckResult adjacency_random(std::size_t count, std::uint64_t seed) {
  CheckResult r;
  Rng rng(seed);
  for (std::size_t t = 0; t < count; ++t) {
    ref::RandomGraph g = ref::random_graph(rng, 1, 8, 0.3);
    std::vector<DfgEdge> edges(g.edges.begin(), g.edges.end());
    const Matrix<double> s = normalize_adjacency(g.n, edges, AdjacencyMode::Symmetric).dense();
    const Matrix<double> d = normalize_adjacency(g.n, edges, AdjacencyMode::DirectedRow).dense();
    const ref::Dense want_s = ref::adjacency(g.n, g.edges, AdjacencyMode::Symmetric);
    const ref::Dense want_d = ref::adjacency(g.n, g.edges, AdjacencyMode::DirectedRow);
    for (std::size_t i = 0; i < g.n; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < g.n; ++j) {
        if (s(i, j) != s(j, i)) r.fail("asymmetric entry in trial " + std::to_string(t));
        r.worst = std::max({r.worst, std::abs(s(i, j) - want_s[i][j]), std::abs(d(i, j) - want_d[i][j])});
        row += d(i, j);
      }
      r.worst = std::max(r.worst, std::abs(row - 1.0));
    }
    ++r.trials;
  }
  if (r.worst > 1e-12) r.fail("gap to dense formula " + std::to_string(r.worst));
  return r;
}

struct RandomGnnCase {
  ref::RandomGraph graph;
  std::size_t d = 1, depth = 1;
  ref::Dense x;
  std::uint64_t weight_seed = 0;
  AdjacencyMode mode = AdjacencyMode::Symmetric;

  std::vector<DfgEdge> edges() const { return {graph.edges.begin(), graph.edges.end()}; }
};

inline std::vector<RandomGnnCase> random_gnn_cases(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RandomGnnCase> out;
  for (std::size_t t = 0; t < count; ++t) {
    RandomGnnCase c;
    c.graph = ref::random_graph(rng, 1, 6, 0.3);
    c.d = 1 + rng.below(4);
    c.depth = 1 + rng.below(3);
    c.x = ref::random_dense(rng, c.graph.n, c.d);
    c.weight_seed = rng.next();
    c.mode = (t % 2) ? AdjacencyMode::DirectedRow : AdjacencyMode::Symmetric;
    out.push_back(std::move(c));
  }
  return out;
}

template <class T>
GcnStack<T> gcn_for(const RandomGnnCase& c, bool bias) {
  auto s = GcnStack<T>::init(std::vector<std::size_t>(c.depth + 1, c.d), c.weight_seed, bias);
  if (bias) {
    Rng rng(c.weight_seed ^ 0x5bd1e995);
    for (auto& b : s.biases)
      for (T& v : b.value.data()) v = static_cast<T>(rng.uniform(-0.5, 0.5));
  }
  return s;
}

template <class T>
GgnnCell<T> ggnn_for(const RandomGnnCase& c) {
  return GgnnCell<T>::init(c.d, c.depth, c.weight_seed);
}

/// Pipeline output vs dense double recurrence. `worst` is the largest entrywise
/// relative error (scale floor 1e-6) for the 64-bit pipeline; the 32-bit pipeline
/// is compared relative to the largest output magnitude.
inline CheckResult gnn_bruteforce(const std::vector<RandomGnnCase>& cases, double tol = 1e-5) {
  CheckResult r;
  double worst_float = 0;
  for (const auto& c : cases) {
    const NormalizedAdjacency adj = normalize_adjacency(c.graph.n, c.edges(), c.mode);
    const ref::Dense a = ref::adjacency(c.graph.n, c.graph.edges, c.mode);
    for (bool bias : {false, true}) {
      auto s = gcn_for<double>(c, bias);
      std::vector<ref::Dense> ws, bs;
      for (auto& w : s.weights) ws.push_back(ref::dense(w.value));
      for (auto& b : s.biases) bs.push_back(ref::dense(b.value));
      const ref::Dense want = ref::gcn(c.x, a, ws, bs);
      r.worst = std::max(r.worst, ref::max_relative_error(ref::dense(gcn_forward(ref::matrix<double>(c.x), adj, s)), want));
      auto sf = gcn_for<float>(c, bias);
      const ref::Dense got_f = ref::dense(gcn_forward(ref::matrix<float>(c.x), adj, sf));
      double scale = 1e-6, gap = 0;
      for (std::size_t i = 0; i < want.size(); ++i)
        for (std::size_t j = 0; j < want[i].size(); ++j)
          scale = std::max(scale, std::abs(want[i][j])), gap = std::max(gap, std::abs(got_f[i][j] - want[i][j]));
      worst_float = std::max(worst_float, gap / scale);
    }
    auto cell = ggnn_for<double>(c);
    const ref::Dense want = ref::ggnn(c.x, a, ref::ggnn_weights(cell), cell.steps);
    r.worst = std::max(r.worst, ref::max_relative_error(ref::dense(ggnn_forward(ref::matrix<double>(c.x), adj, cell)), want));
    auto cf = ggnn_for<float>(c);
    const ref::Dense got_f = ref::dense(ggnn_forward(ref::matrix<float>(c.x), adj, cf));
    double scale = 1e-6, gap = 0;
    for (std::size_t i = 0; i < want.size(); ++i)
      for (std::size_t j = 0; j < want[i].size(); ++j)
        scale = std::max(scale, std::abs(want[i][j])), gap = std::max(gap, std::abs(got_f[i][j] - want[i][j]));
    worst_float = std::max(worst_float, gap / scale);
    ++r.trials;
  }
  std::ostringstream os;
  os << "64-bit worst " << r.worst << ", 32-bit worst " << worst_float;
  r.detail = os.str();
  if (r.worst > tol || worst_float > tol) r.fail(os.str());
  return r;
}

/// Perturb one node's input; nodes further than `depth` hops (symmetrized) must not move.
inline CheckResult khop_locality(const std::vector<RandomGnnCase>& cases, double tol = 1e-6) {
  CheckResult r;
  for (const auto& c : cases) {
    const NormalizedAdjacency adj = normalize_adjacency(c.graph.n, c.edges(), c.mode);
    const auto dist = ref::hop_distances(c.graph);
    auto s = gcn_for<double>(c, false);
    auto cell = ggnn_for<double>(c);
    const ref::Dense base_gcn = ref::dense(gcn_forward(ref::matrix<double>(c.x), adj, s));
    const ref::Dense base_ggnn = ref::dense(ggnn_forward(ref::matrix<double>(c.x), adj, cell));
    for (std::size_t u = 0; u < c.graph.n; ++u) {
      ref::Dense x = c.x;
      for (double& v : x[u]) v += 0.75;
      const ref::Dense g1 = ref::dense(gcn_forward(ref::matrix<double>(x), adj, s));
      const ref::Dense g2 = ref::dense(ggnn_forward(ref::matrix<double>(x), adj, cell));
      for (std::size_t v = 0; v < c.graph.n; ++v) {
        if (dist[u][v] <= c.depth) continue;
        for (std::size_t j = 0; j < c.d; ++j) {
          const double moved = std::max(std::abs(g1[v][j] - base_gcn[v][j]), std::abs(g2[v][j] - base_ggnn[v][j]));
          r.worst = std::max(r.worst, moved);
          if (moved > tol)
            r.fail("node " + std::to_string(v) + " moved when node " + std::to_string(u) + " at distance " +
                   std::to_string(dist[u][v]) + " changed");
        }
      }
    }
    ++r.trials;
  }
  return r;
}

/// f(PX, P A P^T) = P f(X, A) for GCN and GGNN.
inline CheckResult permutation_equivariance(const std::vector<RandomGnnCase>& cases, std::uint64_t seed,
                                            double tol = 1e-6) {
  CheckResult r;
  Rng rng(seed);
  for (const auto& c : cases) {
    std::vector<std::size_t> perm(c.graph.n);  // node i moves to perm[i]
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<DfgEdge> pe;
    for (auto [s, d] : c.graph.edges) pe.emplace_back(perm[s], perm[d]);
    std::sort(pe.begin(), pe.end());
    ref::Dense px(c.graph.n);
    for (std::size_t i = 0; i < c.graph.n; ++i) px[perm[i]] = c.x[i];
    const NormalizedAdjacency adj = normalize_adjacency(c.graph.n, c.edges(), c.mode);
    const NormalizedAdjacency padj = normalize_adjacency(c.graph.n, pe, c.mode);
    auto s = gcn_for<double>(c, true);
    auto cell = ggnn_for<double>(c);
    const ref::Dense a1 = ref::dense(gcn_forward(ref::matrix<double>(c.x), adj, s));
    const ref::Dense b1 = ref::dense(gcn_forward(ref::matrix<double>(px), padj, s));
    const ref::Dense a2 = ref::dense(ggnn_forward(ref::matrix<double>(c.x), adj, cell));
    const ref::Dense b2 = ref::dense(ggnn_forward(ref::matrix<double>(px), padj, cell));
    for (std::size_t i = 0; i < c.graph.n; ++i)
      for (std::size_t j = 0; j < c.d; ++j)
        r.worst = std::max({r.worst, std::abs(a1[i][j] - b1[perm[i]][j]), std::abs(a2[i][j] - b2[perm[i]][j])});
    ++r.trials;
  }
  if (r.worst > tol) r.fail("equivariance gap " + std::to_string(r.worst));
  return r;
}

}  // namespace dfept::testing
