#pragma once

#include <set>
#include <string>

#include "dfept/dfg.hpp"
#include "dfg_oracle.hpp"

namespace dfept::testing {

struct OracleDiff {
  std::set<std::string> missing_nodes, extra_nodes, missing_edges, extra_edges, wrong_loop_edges, wrong_kinds;
  bool ok() const {
    return missing_nodes.empty() && extra_nodes.empty() && missing_edges.empty() && extra_edges.empty() &&
           wrong_loop_edges.empty() && wrong_kinds.empty();
  }
  std::string describe() const;
};

std::string node_label(const DfgNode& n);
std::set<std::string> node_labels(const DataFlowGraph& g);
std::set<std::string> edge_labels(const DataFlowGraph& g, bool loop_only = false);

DataFlowGraph build_case(const DfgOracleCase& c);
OracleDiff compare_with_oracle(const DfgOracleCase& c);

}  // namespace dfept::testing
