#include <gtest/gtest.h>

#include <json.hpp>

#include "dfept/dfg.hpp"
#include "dfg_oracle_check.hpp"
#include "synthetic.hpp"

using namespace dfept;
using namespace dfept::testing;

namespace {

DataFlowGraph graph(const std::string& code, bool back = false) {
  return extract_dfg({"fn", code, std::nullopt}, DfgOptions{back});
}

TypeBindings bindings(const std::string& code) { return collect_type_bindings(parse_function({"t", code, {}})); }

std::size_t count_substr(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + needle.size())) ++n;
  return n;
}

}  // namespace

class OracleCorpus : public ::testing::TestWithParam<DfgOracleCase> {};

TEST_P(OracleCorpus, MatchesHandDerivedGraph) {
  const OracleDiff d = compare_with_oracle(GetParam());
  EXPECT_TRUE(d.ok()) << d.describe();
}

TEST_P(OracleCorpus, GraphIsValid) {
  const DataFlowGraph g = build_case(GetParam());
  EXPECT_NO_THROW(g.validate());
  EXPECT_TRUE(edges_follow_evaluation_order(g));
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(g.nodes[i].node_id, i);
    if (i) EXPECT_LT(g.nodes[i - 1].token_index, g.nodes[i].token_index);
    EXPECT_EQ(g.nodes[i].kind == DfgNodeKind::Constant, is_literal_kind(g.nodes[i].type_feature));
  }
  EXPECT_TRUE(std::is_sorted(g.edges.begin(), g.edges.end()));
  for (const auto& e : g.back_edges) EXPECT_TRUE(std::binary_search(g.edges.begin(), g.edges.end(), e));
  if (!GetParam().back_edges) EXPECT_TRUE(g.back_edges.empty());
}

INSTANTIATE_TEST_SUITE_P(Snippets, OracleCorpus, ::testing::ValuesIn(dfg_oracle_cases()),
                         [](const auto& info) { return info.param.name; });

TEST(OracleCorpusSize, AtLeastTwentySnippets) { EXPECT_GE(dfg_oracle_cases().size(), 20u); }

TEST(BuildDfg, DeclarationWithBinaryInitializer) {
  DataFlowGraph g = graph("int a = b + c;");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g.nodes[0].name, "a");
  EXPECT_EQ(g.nodes[1].name, "b");
  EXPECT_EQ(g.nodes[2].name, "c");
  EXPECT_EQ(g.edges, (std::vector<DfgEdge>{{1, 0}, {2, 0}}));
}

TEST(BuildDfg, DeclarationWithoutFlow) {
  DataFlowGraph g = graph("int x;");
  ASSERT_EQ(g.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(BuildDfg, NullReachesUseThroughDefinition) {
  DataFlowGraph g = graph("void f(void) { char* s = NULL; use(s); }");
  std::size_t null_id = g.size(), def = g.size(), use = g.size();
  for (const auto& n : g.nodes) {
    if (n.name == "NULL") null_id = n.node_id;
    if (n.name == "s" && def == g.size()) def = n.node_id;
    else if (n.name == "s") use = n.node_id;
  }
  ASSERT_LT(use, g.size());
  EXPECT_EQ(g.nodes[null_id].kind, DfgNodeKind::Constant);
  EXPECT_EQ(g.nodes[null_id].type_feature, "null");
  EXPECT_TRUE(g.has_edge(null_id, def));
  EXPECT_TRUE(g.has_edge(def, use));
}

TEST(BuildDfg, AlphaRenamingGivesIsomorphicGraph) {
  const auto& cases = dfg_oracle_cases();
  auto find = [&](const std::string& n) {
    return *std::find_if(cases.begin(), cases.end(), [&](const auto& c) { return c.name == n; });
  };
  DataFlowGraph a = build_case(find("alpha_a")), b = build_case(find("alpha_b"));
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.edges, b.edges);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.nodes[i].type_feature, b.nodes[i].type_feature);
    EXPECT_EQ(a.nodes[i].kind, b.nodes[i].kind);
    EXPECT_EQ(a.nodes[i].token_index, b.nodes[i].token_index);
  }
}

TEST(BuildDfg, AlphaRenamingOnSyntheticCorpus) {
  // rename every identifier in a generated function by appending a suffix
  for (const auto& f : synthetic_corpus(10, 3).samples) {
    DataFlowGraph g = extract_dfg(f);
    std::string renamed;
    SyntaxTree t = parse_function(f);
    std::size_t pos = 0;
    for (const auto& l : leaf_tokens(t)) {
      const auto& n = t.node(l.node);
      renamed += f.code.substr(pos, n.span.start - pos);
      renamed += t.text(l.node);
      if (n.kind == "identifier") renamed += "_r";
      pos = n.span.end;
    }
    renamed += f.code.substr(pos);
    DataFlowGraph h = extract_dfg(SourceFunction{f.id, renamed, f.label});
    ASSERT_EQ(g.size(), h.size()) << f.code;
    EXPECT_EQ(g.edges, h.edges);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.nodes[i].type_feature, h.nodes[i].type_feature);
  }
}

TEST(BuildDfg, UseChainsGoForwardInTokenOrder) {
  // no definition takes a later operand, so token order and evaluation order agree
  DataFlowGraph g = graph("void f(int a) { g(a); h(a); a++; k(a); }");
  ASSERT_FALSE(g.edges.empty());
  for (auto [s, d] : g.edges) EXPECT_LT(g.nodes[s].token_index, g.nodes[d].token_index);
}

TEST(BuildDfg, NodeCountBoundedByOccurrences) {
  for (const auto& f : synthetic_corpus(20, 9).samples) {
    SyntaxTree t = parse_function(f);
    std::size_t occurrences = 0;
    for (const auto& l : leaf_tokens(t)) {
      const auto& k = t.node(l.node).kind;
      if (k == "identifier" || is_literal_kind(k)) ++occurrences;
    }
    DataFlowGraph g = build_dfg(t, collect_type_bindings(t), f.id);
    EXPECT_LE(g.size(), occurrences);
    EXPECT_NO_THROW(g.validate());
  }
}

TEST(BuildDfg, FlowFreeFunctionIsEmpty) {
  DataFlowGraph g = graph("void f(void) { return; }");
  EXPECT_TRUE(g.empty());
}

TEST(BuildDfg, BackEdgesOnlyWhenRequested) {
  const std::string loop = "void f(int n) { while (n) { n = n - 1; } }";
  EXPECT_TRUE(graph(loop).back_edges.empty());
  DataFlowGraph g = graph(loop, true);
  EXPECT_FALSE(g.back_edges.empty());
  for (auto [s, d] : g.back_edges) EXPECT_GT(g.nodes[s].token_index, g.nodes[d].token_index);
}

TEST(Validate, RejectsBrokenGraphs) {
  DataFlowGraph g = graph("int a = b;");
  DataFlowGraph dangling = g;
  dangling.edges.push_back({0, 7});
  DataFlowGraph self = g;
  self.edges.push_back({1, 1});
  DataFlowGraph sparse = g;
  sparse.nodes[1].node_id = 5;
  for (const auto* bad : {&dangling, &self, &sparse}) {
    try {
      bad->validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ContractViolation);
    }
  }
}

TEST(TypeBindings, ParameterAndLocal) {
  TypeBindings b = bindings("int f(float x){int y;}");
  EXPECT_EQ(b, (TypeBindings{{"x", "float"}, {"y", "int"}}));
}

TEST(TypeBindings, NoDeclarations) { EXPECT_TRUE(bindings("void f(void){ g(); }").empty()); }

TEST(TypeBindings, PointerDeclaratorIsNormalized) {
  EXPECT_EQ(bindings("char* str1 = NULL;").at("str1"), "char *");
  EXPECT_EQ(bindings("void f(char ** argv){}").at("argv"), "char **");
}

TEST(TypeBindings, LaterRedeclarationWins) {
  EXPECT_EQ(bindings("void f(int v){ { char *v; } }").at("v"), "char *");
}

TEST(Export, EmptyGraphJson) {
  DataFlowGraph g;
  g.function_id = "e";
  EXPECT_EQ(export_graph(g, "json"), R"({"function_id":"e","nodes":[],"edges":[]})");
}

TEST(Export, OneEdgeDot) {
  DataFlowGraph g = graph("int a = b;");
  g.function_id = "one";
  const std::string dot = export_graph(g, GraphFormat::Dot);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  EXPECT_EQ(count_substr(dot, "->"), 1u);
  EXPECT_NE(dot.find("a@1 : int"), std::string::npos);
  EXPECT_NE(dot.find("b@3 : unknown"), std::string::npos);
}

TEST(Export, CopyDeclarationJson) {
  DataFlowGraph g = graph("int a = b;");
  auto j = nlohmann::json::parse(export_graph(g, "json"));
  EXPECT_EQ(j["nodes"].size(), 2u);
  EXPECT_EQ(j["edges"].size(), 1u);
  EXPECT_EQ(j["function_id"], "fn");
  EXPECT_EQ(j["nodes"][0]["kind"], "variable");
  EXPECT_EQ(j["edges"][0], nlohmann::json::array({1, 0}));
  EXPECT_FALSE(j.contains("back_edges"));
}

TEST(Export, ByteStable) {
  DataFlowGraph g = graph(dfg_oracle_cases()[3].code);
  EXPECT_EQ(export_graph(g, "json"), export_graph(graph(dfg_oracle_cases()[3].code), "json"));
  EXPECT_EQ(export_graph(g, "dot"), export_graph(g, "dot"));
}

TEST(Export, NullFlowDotHasNullToStr1Path) {
  DataFlowGraph g = graph(dfg_oracle_cases()[3].code);
  const std::string dot = export_graph(g, "dot");
  // NULL@12 -> str1@10 -> str1@22
  std::size_t null_id = 0, def = 0, use = 0;
  for (const auto& n : g.nodes) {
    if (n.token_index == 12) null_id = n.node_id;
    if (n.token_index == 10) def = n.node_id;
    if (n.token_index == 22) use = n.node_id;
  }
  EXPECT_NE(dot.find("n" + std::to_string(null_id) + " -> n" + std::to_string(def) + ";"), std::string::npos);
  EXPECT_NE(dot.find("n" + std::to_string(def) + " -> n" + std::to_string(use) + ";"), std::string::npos);
}

TEST(Export, UnknownFormat) {
  try {
    export_graph(graph("int a;"), "graphml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedFormat);
  }
}

TEST(Export, JsonRoundTrip) {
  for (const auto& c : dfg_oracle_cases()) {
    DataFlowGraph g = build_case(c);
    const std::string text = export_graph(g, "json");
    DataFlowGraph back = graph_from_json(text);
    EXPECT_EQ(export_graph(back, "json"), text) << c.name;
    EXPECT_EQ(back.back_edges, g.back_edges);
  }
}

TEST(Export, MalformedJsonIsFormatError) {
  for (const char* bad : {"{", R"({"function_id":"x","nodes":[{"id":0}],"edges":[]})",
                          R"({"function_id":"x","nodes":[],"edges":[[0,1]]})"}) {
    try {
      graph_from_json(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_TRUE(e.kind() == ErrorKind::FormatError || e.kind() == ErrorKind::ContractViolation) << bad;
    }
  }
}
