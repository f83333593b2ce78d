#include "dfg_oracle_check.hpp"

#include <algorithm>
#include <iterator>

namespace dfept::testing {
namespace {

std::set<std::string> minus(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::set<std::string> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

std::string short_label(const DfgNode& n) { return n.name + "@" + std::to_string(n.token_index); }

}  // namespace

std::string node_label(const DfgNode& n) { return short_label(n) + ":" + n.type_feature; }

std::set<std::string> node_labels(const DataFlowGraph& g) {
  std::set<std::string> out;
  for (const auto& n : g.nodes) out.insert(node_label(n));
  return out;
}

std::set<std::string> edge_labels(const DataFlowGraph& g, bool loop_only) {
  std::set<std::string> out;
  for (const auto& [s, d] : loop_only ? g.back_edges : g.edges)
    out.insert(short_label(g.nodes[s]) + "->" + short_label(g.nodes[d]));
  return out;
}

DataFlowGraph build_case(const DfgOracleCase& c) {
  return extract_dfg(SourceFunction{c.name, c.code, std::nullopt}, DfgOptions{c.back_edges});
}

OracleDiff compare_with_oracle(const DfgOracleCase& c) {
  const DataFlowGraph g = build_case(c);
  const std::set<std::string> want_nodes(c.nodes.begin(), c.nodes.end());
  const std::set<std::string> want_edges(c.edges.begin(), c.edges.end());
  const std::set<std::string> want_loop(c.loop_edges.begin(), c.loop_edges.end());
  OracleDiff d;
  const auto got_nodes = node_labels(g), got_edges = edge_labels(g);
  d.missing_nodes = minus(want_nodes, got_nodes);
  d.extra_nodes = minus(got_nodes, want_nodes);
  d.missing_edges = minus(want_edges, got_edges);
  d.extra_edges = minus(got_edges, want_edges);
  const auto got_loop = edge_labels(g, true);
  for (const auto& e : minus(want_loop, got_loop)) d.wrong_loop_edges.insert(e);
  for (const auto& e : minus(got_loop, want_loop)) d.wrong_loop_edges.insert(e);
  for (const auto& n : g.nodes)
    if ((n.kind == DfgNodeKind::Constant) != is_literal_kind(n.type_feature)) d.wrong_kinds.insert(node_label(n));
  return d;
}

std::string OracleDiff::describe() const {
  std::string out;
  auto add = [&](const char* what, const std::set<std::string>& s) {
    for (const auto& x : s) out += std::string(what) + " " + x + "\n";
  };
  add("missing node", missing_nodes);
  add("extra node", extra_nodes);
  add("missing edge", missing_edges);
  add("extra edge", extra_edges);
  add("loop edge mismatch", wrong_loop_edges);
  add("kind mismatch", wrong_kinds);
  return out;
}

}  // namespace dfept::testing
