#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfept/ast.hpp"

namespace dfept {

enum class DfgNodeKind { Variable, Constant };

/// One variable occurrence (or consumed literal) in a function.
///
/// Repeated appearances of the same variable are separate nodes, told apart by
/// their token_index.
struct DfgNode {
  std::size_t node_id = 0;
  std::string name;
  std::size_t token_index = 0;
  DfgNodeKind kind = DfgNodeKind::Variable;
  /// Declared type text for variables ("char *"), grammar kind for constants ("null").
  std::string type_feature;
  /// Position in the builder's evaluation sequence. A definition is evaluated
  /// after its right-hand side even though its identifier comes first in the text.
  std::size_t eval_order = 0;
};

using DfgEdge = std::pair<std::size_t, std::size_t>;

/// Directed comes-from graph: edge (i, j) means the value at node j originates from node i.
struct DataFlowGraph {
  std::string function_id;
  std::vector<DfgNode> nodes;
  /// Sorted, unique, includes back_edges.
  std::vector<DfgEdge> edges;
  /// Loop back-bindings (sorted subset of edges); empty unless requested.
  std::vector<DfgEdge> back_edges;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
  bool has_edge(std::size_t src, std::size_t dst) const;

  /// Throws ContractViolation when ids are not dense, an edge dangles, or a self-edge exists.
  void validate() const;
};

inline constexpr std::string_view kUnknownType = "unknown";

bool is_literal_kind(std::string_view kind);

/// Variable name -> declared type text, parameters and locals in source order.
using TypeBindings = std::map<std::string, std::string, std::less<>>;

TypeBindings collect_type_bindings(const SyntaxTree& tree);

struct DfgOptions {
  /// Let definitions late in a loop body reach earlier uses in the same loop.
  bool loop_back_edges = false;
};

/// Extract the data flow graph. Edges follow these comes-from rules:
///  - `T x = rhs;` and `x = rhs;`: every identifier and literal in rhs flows into x.
///  - compound assignment, `x++`, and stores through `x[i]`, `x->f`, `*x` also keep
///    the previous definition of x flowing in.
///  - every other identifier occurrence is a use and receives the reaching
///    definitions of its name. Both arms of a branch reach code after the branch.
///  - callee names, field names and type names are not nodes; literals only become
///    nodes when an initializer or assignment consumes them.
///  - loops are walked once; back-bindings only with DfgOptions::loop_back_edges.
DataFlowGraph build_dfg(const SyntaxTree& tree, const TypeBindings& bindings, std::string function_id = {},
                        DfgOptions options = {});

/// Parse + collect bindings + build, for callers that only need the graph.
DataFlowGraph extract_dfg(const SourceFunction& source, DfgOptions options = {});

enum class GraphFormat { Dot, Json };

GraphFormat parse_graph_format(std::string_view tag);
std::string export_graph(const DataFlowGraph& dfg, GraphFormat format);
std::string export_graph(const DataFlowGraph& dfg, std::string_view format);

/// Inverse of the JSON export. eval_order is set to token_index.
DataFlowGraph graph_from_json(std::string_view text);

/// True when every non-back edge goes forward in evaluation order.
bool edges_follow_evaluation_order(const DataFlowGraph& dfg);

}  // namespace dfept
