#include "dfept/gnn.hpp"

#include <algorithm>
#include <set>

namespace dfept {

std::string_view to_string(AdjacencyMode mode) {
  return mode == AdjacencyMode::Symmetric ? "symmetric" : "directed";
}

AdjacencyMode parse_adjacency_mode(std::string_view tag) {
  if (tag == "symmetric") return AdjacencyMode::Symmetric;
  if (tag == "directed" || tag == "directed_row" || tag == "directed-row") return AdjacencyMode::DirectedRow;
  throw Error(ErrorKind::UnsupportedFormat, "unknown adjacency mode '" + std::string(tag) + "'");
}

Matrix<double> NormalizedAdjacency::dense() const {
  Matrix<double> m(n, n);
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& [u, w] : rows[v]) m(v, u) = w;
  return m;
}

NormalizedAdjacency normalize_adjacency(std::size_t n, const std::vector<DfgEdge>& edges, AdjacencyMode mode) {
  if (n == 0) throw Error(ErrorKind::EmptyGraph, "cannot normalize the adjacency of an empty graph");
  // neighbours[v] = u that v aggregates from, self included
  std::vector<std::set<std::size_t>> neighbours(n);
  for (std::size_t v = 0; v < n; ++v) neighbours[v].insert(v);
  for (auto [src, dst] : edges) {
    if (src >= n || dst >= n) throw Error(ErrorKind::ContractViolation, "edge endpoint out of range");
    neighbours[dst].insert(src);
    if (mode == AdjacencyMode::Symmetric) neighbours[src].insert(dst);
  }

  NormalizedAdjacency adj;
  adj.n = n;
  adj.mode = mode;
  adj.rows.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const double dv = static_cast<double>(neighbours[v].size());
    for (std::size_t u : neighbours[v]) {
      const double w = mode == AdjacencyMode::Symmetric
                           ? 1.0 / (std::sqrt(dv) * std::sqrt(static_cast<double>(neighbours[u].size())))
                           : 1.0 / dv;
      adj.rows[v].emplace_back(u, w);
    }
  }
  return adj;
}

NormalizedAdjacency normalize_adjacency(const DataFlowGraph& dfg, AdjacencyMode mode) {
  return normalize_adjacency(dfg.size(), dfg.edges, mode);
}

}  // namespace dfept
