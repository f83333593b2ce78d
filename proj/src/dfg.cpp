#include "dfept/dfg.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace dfept {
namespace {

constexpr std::array<std::string_view, 7> kLiteralKinds = {
    "number_literal", "string_literal", "char_literal", "null", "true", "false", "raw_string_literal"};

// Type keywords the parser sometimes surfaces as identifiers inside ERROR nodes.
constexpr std::array<std::string_view, 20> kKeywordIdentifiers = {
    "int",    "char",     "short",    "long",   "float",  "double", "void",     "unsigned", "signed", "const",
    "static", "volatile", "register", "extern", "inline", "struct", "union",    "enum",     "return", "sizeof"};

bool is_keyword_identifier(std::string_view text) {
  return std::find(kKeywordIdentifiers.begin(), kKeywordIdentifiers.end(), text) != kKeywordIdentifiers.end();
}

bool is_type_kind(std::string_view kind) {
  return kind.ends_with("_specifier") || kind == "type_descriptor" || kind == "primitive_type" ||
         kind == "type_identifier" || kind == "type_qualifier" || kind == "field_declaration_list" ||
         kind == "enumerator_list";
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

struct DeclaratorInfo {
  NodeId ident = kNoNode;
  int stars = 0;
  int arrays = 0;
  std::vector<NodeId> sizes;
  /// Declares a function (prototype), not a variable.
  bool function = false;
};

NodeId first_named_child(const SyntaxTree& t, NodeId id) {
  for (NodeId c : t.node(id).children)
    if (t.node(c).named) return c;
  return kNoNode;
}

DeclaratorInfo resolve_declarator(const SyntaxTree& t, NodeId id) {
  DeclaratorInfo info;
  NodeId cur = id;
  while (cur != kNoNode) {
    const SyntaxNode& n = t.node(cur);
    if (n.kind == "identifier") {
      info.ident = cur;
      break;
    }
    if (n.kind == "init_declarator") {
      cur = t.child_by_field(cur, "declarator");
    } else if (n.kind == "pointer_declarator") {
      ++info.stars;
      cur = t.child_by_field(cur, "declarator");
    } else if (n.kind == "array_declarator") {
      ++info.arrays;
      if (NodeId size = t.child_by_field(cur, "size"); size != kNoNode) info.sizes.push_back(size);
      cur = t.child_by_field(cur, "declarator");
    } else if (n.kind == "parenthesized_declarator" || n.kind == "attributed_declarator") {
      cur = first_named_child(t, cur);
    } else if (n.kind == "function_declarator") {
      NodeId inner = t.child_by_field(cur, "declarator");
      // `int (*fp)(int)` declares a pointer; `int f(int)` declares a function.
      if (inner == kNoNode || t.node(inner).kind != "parenthesized_declarator") info.function = true;
      cur = inner;
    } else {
      break;
    }
  }
  if (info.function) info.stars = 0;
  return info;
}

std::string base_type(const SyntaxTree& t, NodeId declaration) {
  NodeId ty = t.child_by_field(declaration, "type");
  if (ty == kNoNode) return std::string(kUnknownType);
  const SyntaxNode& n = t.node(ty);
  if (n.kind == "struct_specifier" || n.kind == "union_specifier" || n.kind == "enum_specifier") {
    std::string out(n.kind.substr(0, n.kind.find('_')));
    if (NodeId name = t.child_by_field(ty, "name"); name != kNoNode) out += " " + std::string(t.text(name));
    return out;
  }
  return collapse_whitespace(t.text(ty));
}

std::string declared_type(const std::string& base, const DeclaratorInfo& info) {
  std::string out = base;
  if (info.stars > 0) out += " " + std::string(static_cast<std::size_t>(info.stars), '*');
  if (info.arrays > 0) {
    if (info.stars == 0) out += ' ';
    for (int i = 0; i < info.arrays; ++i) out += "[]";
  }
  return out;
}

NodeId find_function_declarator(const SyntaxTree& t, NodeId id) {
  NodeId cur = id;
  while (cur != kNoNode) {
    const std::string& kind = t.node(cur).kind;
    if (kind == "function_declarator") return cur;
    if (kind == "pointer_declarator" || kind == "attributed_declarator")
      cur = t.child_by_field(cur, "declarator");
    else if (kind == "parenthesized_declarator")
      cur = first_named_child(t, cur);
    else
      return kNoNode;
  }
  return kNoNode;
}

void bind_declaration(const SyntaxTree& t, NodeId decl, TypeBindings& out) {
  const std::string base = base_type(t, decl);
  for (NodeId d : t.children_by_field(decl, "declarator")) {
    DeclaratorInfo info = resolve_declarator(t, d);
    if (info.function || info.ident == kNoNode) continue;
    out.insert_or_assign(std::string(t.text(info.ident)), declared_type(base, info));
  }
}

class Builder {
 public:
  Builder(const SyntaxTree& tree, const TypeBindings& bindings, DfgOptions options)
      : t_(tree), bindings_(bindings), options_(options) {
    for (const LeafToken& leaf : leaf_tokens(tree)) token_of_[leaf.node] = leaf.token_index;
  }

  DataFlowGraph run(std::string function_id) {
    visit(t_.root_id(), nullptr);
    return finish(std::move(function_id));
  }

 private:
  struct Pending {
    std::string name;
    std::size_t token;
    DfgNodeKind kind;
    std::string type;
    /// Consumes reaching definitions of its own name (uses and read-modify-write defs).
    bool reads_prior;
  };
  using State = std::map<std::string, std::vector<std::size_t>, std::less<>>;
  using Sink = std::vector<std::size_t>;

  static State merge(const State& a, const State& b) {
    State out = a;
    for (const auto& [name, defs] : b) {
      auto& target = out[name];
      std::vector<std::size_t> merged;
      std::set_union(target.begin(), target.end(), defs.begin(), defs.end(), std::back_inserter(merged));
      target = std::move(merged);
    }
    return out;
  }

  void visit_children(NodeId id, Sink* sink) {
    for (NodeId c : t_.node(id).children) visit(c, sink);
  }

  void visit(NodeId id, Sink* sink) {
    const SyntaxNode& n = t_.node(id);
    if (n.directive) return;
    const std::string& kind = n.kind;
    if (kind == "identifier") {
      use(id, sink);
    } else if (is_literal_kind(kind)) {
      if (sink) literal(id, *sink);
    } else if (kind == "function_definition") {
      visit_function(id);
    } else if (kind == "declaration") {
      visit_declaration(id, sink);
    } else if (kind == "assignment_expression") {
      visit_assignment(id, sink);
    } else if (kind == "update_expression") {
      NodeId arg = t_.child_by_field(id, "argument");
      bool weak = false;
      NodeId base = arg == kNoNode ? kNoNode : lvalue_base(arg, weak);
      if (base != kNoNode) define(base, {}, true, sink);
    } else if (kind == "call_expression") {
      NodeId callee = t_.child_by_field(id, "function");
      if (callee != kNoNode && t_.node(callee).kind != "identifier") visit(callee, sink);
      if (NodeId args = t_.child_by_field(id, "arguments"); args != kNoNode) visit(args, sink);
    } else if (kind == "if_statement") {
      visit_if(id);
    } else if (kind == "while_statement") {
      visit_while(id);
    } else if (kind == "do_statement") {
      visit_do(id);
    } else if (kind == "for_statement") {
      visit_for(id);
    } else if (kind == "switch_statement") {
      visit_switch(id);
    } else if (is_type_kind(kind) || kind == "parameter_list" || kind == "goto_statement" ||
               kind == "field_identifier" || kind == "statement_identifier") {
      // no variable occurrences
    } else {
      visit_children(id, sink);
    }
  }

  void visit_function(NodeId id) {
    for (NodeId c : t_.node(id).children) {
      const SyntaxNode& child = t_.node(c);
      if (child.field == "declarator") {
        NodeId fn = find_function_declarator(t_, c);
        NodeId params = fn == kNoNode ? kNoNode : t_.child_by_field(fn, "parameters");
        if (params == kNoNode) continue;
        for (NodeId p : t_.node(params).children) {
          if (t_.node(p).kind != "parameter_declaration") continue;
          NodeId d = t_.child_by_field(p, "declarator");
          if (d == kNoNode) continue;
          DeclaratorInfo info = resolve_declarator(t_, d);
          if (info.function || info.ident == kNoNode) continue;
          for (NodeId size : info.sizes) visit(size, nullptr);
          define(info.ident, {}, false, nullptr);
        }
      } else if (child.field == "body") {
        visit(c, nullptr);
      }
      // storage class, return type and header ERROR nodes carry no flow
    }
  }

  void visit_declaration(NodeId id, Sink* sink) {
    for (NodeId d : t_.children_by_field(id, "declarator")) {
      Sink rhs;
      if (t_.node(d).kind == "init_declarator")
        if (NodeId value = t_.child_by_field(d, "value"); value != kNoNode) visit(value, &rhs);
      DeclaratorInfo info = resolve_declarator(t_, d);
      if (info.function || info.ident == kNoNode) continue;
      for (NodeId size : info.sizes) visit(size, nullptr);
      define(info.ident, rhs, false, sink);
    }
  }

  void visit_assignment(NodeId id, Sink* sink) {
    NodeId left = t_.child_by_field(id, "left");
    NodeId right = t_.child_by_field(id, "right");
    NodeId op = t_.child_by_field(id, "operator");
    Sink rhs;
    if (right != kNoNode) visit(right, &rhs);
    bool weak = false;
    NodeId base = left == kNoNode ? kNoNode : lvalue_base(left, weak);
    if (base == kNoNode) {
      if (sink) sink->insert(sink->end(), rhs.begin(), rhs.end());
      return;
    }
    const bool compound = op != kNoNode && t_.text(op) != "=";
    define(base, rhs, compound || weak, sink);
  }

  /// Variable written by an lvalue. Stores through subscripts, fields and
  /// dereferences are weak updates of the base variable; index operands are uses.
  NodeId lvalue_base(NodeId id, bool& weak) {
    const SyntaxNode& n = t_.node(id);
    if (n.kind == "identifier") return is_keyword_identifier(t_.text(id)) ? kNoNode : id;
    if (n.kind == "parenthesized_expression") {
      NodeId inner = first_named_child(t_, id);
      return inner == kNoNode ? kNoNode : lvalue_base(inner, weak);
    }
    if (n.kind == "subscript_expression") {
      weak = true;
      if (NodeId index = t_.child_by_field(id, "index"); index != kNoNode) visit(index, nullptr);
      NodeId arg = t_.child_by_field(id, "argument");
      return arg == kNoNode ? kNoNode : lvalue_base(arg, weak);
    }
    if (n.kind == "field_expression" || n.kind == "pointer_expression") {
      weak = true;
      NodeId arg = t_.child_by_field(id, "argument");
      return arg == kNoNode ? kNoNode : lvalue_base(arg, weak);
    }
    if (n.kind == "cast_expression") {
      NodeId value = t_.child_by_field(id, "value");
      return value == kNoNode ? kNoNode : lvalue_base(value, weak);
    }
    visit(id, nullptr);
    return kNoNode;
  }

  void visit_if(NodeId id) {
    if (NodeId cond = t_.child_by_field(id, "condition"); cond != kNoNode) visit(cond, nullptr);
    const State before = state_;
    if (NodeId then = t_.child_by_field(id, "consequence"); then != kNoNode) visit(then, nullptr);
    State after_then = std::move(state_);
    state_ = before;
    if (NodeId alt = t_.child_by_field(id, "alternative"); alt != kNoNode) visit(alt, nullptr);
    state_ = merge(after_then, state_);
  }

  void visit_while(NodeId id) {
    const std::size_t first = pending_.size();
    if (NodeId cond = t_.child_by_field(id, "condition"); cond != kNoNode) visit(cond, nullptr);
    const State entry = state_;
    if (NodeId body = t_.child_by_field(id, "body"); body != kNoNode) visit(body, nullptr);
    add_back_edges(first, state_);
    state_ = merge(entry, state_);
  }

  void visit_do(NodeId id) {
    const std::size_t first = pending_.size();
    if (NodeId body = t_.child_by_field(id, "body"); body != kNoNode) visit(body, nullptr);
    if (NodeId cond = t_.child_by_field(id, "condition"); cond != kNoNode) visit(cond, nullptr);
    add_back_edges(first, state_);
  }

  void visit_for(NodeId id) {
    for (NodeId init : t_.children_by_field(id, "initializer")) visit(init, nullptr);
    const std::size_t first = pending_.size();
    for (NodeId cond : t_.children_by_field(id, "condition")) visit(cond, nullptr);
    const State entry = state_;
    // The update runs after the body, but the walk stays in token order: the
    // body sees definitions from both the initializer and the update.
    for (NodeId upd : t_.children_by_field(id, "update")) visit(upd, nullptr);
    state_ = merge(entry, state_);
    if (NodeId body = t_.child_by_field(id, "body"); body != kNoNode) visit(body, nullptr);
    add_back_edges(first, state_);
    state_ = merge(entry, state_);
  }

  void visit_switch(NodeId id) {
    if (NodeId cond = t_.child_by_field(id, "condition"); cond != kNoNode) visit(cond, nullptr);
    NodeId body = t_.child_by_field(id, "body");
    if (body == kNoNode) return;
    const State entry = state_;
    State exit = entry;
    for (NodeId c : t_.node(body).children) {
      if (t_.node(c).kind == "case_statement") {
        state_ = entry;
        visit_children(c, nullptr);
        exit = merge(exit, state_);
      } else {
        visit(c, nullptr);
        exit = merge(exit, state_);
      }
    }
    state_ = std::move(exit);
  }

  std::optional<std::size_t> new_node(NodeId leaf, DfgNodeKind kind, bool reads_prior) {
    auto tok = token_of_.find(leaf);
    if (tok == token_of_.end()) return std::nullopt;
    if (seen_.count(leaf)) return std::nullopt;
    seen_.insert(leaf);
    std::string name(t_.text(leaf));
    std::string type;
    if (kind == DfgNodeKind::Constant) {
      type = t_.node(leaf).kind;
    } else {
      auto it = bindings_.find(name);
      type = it == bindings_.end() ? std::string(kUnknownType) : it->second;
    }
    pending_.push_back({std::move(name), tok->second, kind, std::move(type), reads_prior});
    return pending_.size() - 1;
  }

  void use(NodeId ident, Sink* sink) {
    if (is_keyword_identifier(t_.text(ident))) return;
    auto u = new_node(ident, DfgNodeKind::Variable, true);
    if (!u) return;
    if (auto it = state_.find(pending_[*u].name); it != state_.end())
      for (std::size_t d : it->second) add_edge(d, *u, false);
    if (sink) sink->push_back(*u);
  }

  void literal(NodeId leaf, Sink& sink) {
    if (auto c = new_node(leaf, DfgNodeKind::Constant, false)) sink.push_back(*c);
  }

  void define(NodeId ident, const Sink& sources, bool keep_prior, Sink* sink) {
    auto d = new_node(ident, DfgNodeKind::Variable, keep_prior);
    if (!d) {
      if (sink) sink->insert(sink->end(), sources.begin(), sources.end());
      return;
    }
    for (std::size_t s : sources) add_edge(s, *d, false);
    auto& defs = state_[pending_[*d].name];
    if (keep_prior)
      for (std::size_t p : defs) add_edge(p, *d, false);
    defs.assign({*d});
    if (sink) {
      sink->insert(sink->end(), sources.begin(), sources.end());
      sink->push_back(*d);
    }
  }

  void add_edge(std::size_t src, std::size_t dst, bool back) {
    if (src == dst) return;
    edges_.insert({src, dst});
    if (back) back_.insert({src, dst});
  }

  void add_back_edges(std::size_t first, const State& end) {
    if (!options_.loop_back_edges) return;
    for (std::size_t r = first; r < pending_.size(); ++r) {
      if (!pending_[r].reads_prior) continue;
      auto it = end.find(pending_[r].name);
      if (it == end.end()) continue;
      for (std::size_t d : it->second)
        if (d >= first && d != r && pending_[d].token > pending_[r].token) add_edge(d, r, true);
    }
  }

  DataFlowGraph finish(std::string function_id) {
    std::vector<std::size_t> order(pending_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pending_[a].token < pending_[b].token; });
    std::vector<std::size_t> id_of(pending_.size());
    DataFlowGraph g;
    g.function_id = std::move(function_id);
    g.nodes.reserve(order.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const Pending& p = pending_[order[rank]];
      id_of[order[rank]] = rank;
      g.nodes.push_back({rank, p.name, p.token, p.kind, p.type, order[rank]});
    }
    for (auto [s, d] : edges_) g.edges.emplace_back(id_of[s], id_of[d]);
    for (auto [s, d] : back_) g.back_edges.emplace_back(id_of[s], id_of[d]);
    std::sort(g.edges.begin(), g.edges.end());
    std::sort(g.back_edges.begin(), g.back_edges.end());
    g.validate();
    return g;
  }

  const SyntaxTree& t_;
  const TypeBindings& bindings_;
  DfgOptions options_;
  std::unordered_map<NodeId, std::size_t> token_of_;
  std::set<NodeId> seen_;
  std::vector<Pending> pending_;
  std::set<DfgEdge> edges_;
  std::set<DfgEdge> back_;
  State state_;
};

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

bool is_literal_kind(std::string_view kind) {
  return std::find(kLiteralKinds.begin(), kLiteralKinds.end(), kind) != kLiteralKinds.end();
}

bool DataFlowGraph::has_edge(std::size_t src, std::size_t dst) const {
  return std::binary_search(edges.begin(), edges.end(), DfgEdge{src, dst});
}

void DataFlowGraph::validate() const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].node_id != i) throw Error(ErrorKind::ContractViolation, "node ids are not dense");
    if (i > 0 && nodes[i - 1].token_index >= nodes[i].token_index)
      throw Error(ErrorKind::ContractViolation, "nodes are not ordered by unique token_index");
    const bool constant = nodes[i].kind == DfgNodeKind::Constant;
    if (constant != is_literal_kind(nodes[i].type_feature))
      throw Error(ErrorKind::ContractViolation, "constant kind and literal type disagree at node " + std::to_string(i));
  }
  for (auto [s, d] : edges) {
    if (s >= nodes.size() || d >= nodes.size())
      throw Error(ErrorKind::ContractViolation, "edge endpoint out of range");
    if (s == d) throw Error(ErrorKind::ContractViolation, "self-edge on node " + std::to_string(s));
  }
  for (const DfgEdge& e : back_edges)
    if (!has_edge(e.first, e.second)) throw Error(ErrorKind::ContractViolation, "back edge missing from edge set");
}

bool edges_follow_evaluation_order(const DataFlowGraph& dfg) {
  for (const DfgEdge& e : dfg.edges) {
    if (std::binary_search(dfg.back_edges.begin(), dfg.back_edges.end(), e)) continue;
    if (dfg.nodes[e.first].eval_order >= dfg.nodes[e.second].eval_order) return false;
  }
  return true;
}

TypeBindings collect_type_bindings(const SyntaxTree& tree) {
  TypeBindings out;
  std::vector<NodeId> stack{tree.root_id()};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    const SyntaxNode& n = tree.node(id);
    if (n.directive || n.kind == "parameter_list") continue;
    if (n.kind == "declaration") bind_declaration(tree, id, out);
    if (n.kind == "function_definition") {
      NodeId fn = find_function_declarator(tree, tree.child_by_field(id, "declarator"));
      NodeId params = fn == kNoNode ? kNoNode : tree.child_by_field(fn, "parameters");
      if (params != kNoNode)
        for (NodeId p : tree.node(params).children)
          if (tree.node(p).kind == "parameter_declaration") bind_declaration(tree, p, out);
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

DataFlowGraph build_dfg(const SyntaxTree& tree, const TypeBindings& bindings, std::string function_id,
                        DfgOptions options) {
  return Builder(tree, bindings, options).run(std::move(function_id));
}

DataFlowGraph extract_dfg(const SourceFunction& source, DfgOptions options) {
  SyntaxTree tree = parse_function(source, false);
  return build_dfg(tree, collect_type_bindings(tree), source.id, options);
}

GraphFormat parse_graph_format(std::string_view tag) {
  if (tag == "dot") return GraphFormat::Dot;
  if (tag == "json") return GraphFormat::Json;
  throw Error(ErrorKind::UnsupportedFormat, "unknown graph format '" + std::string(tag) + "'");
}

std::string export_graph(const DataFlowGraph& dfg, std::string_view format) {
  return export_graph(dfg, parse_graph_format(format));
}

std::string export_graph(const DataFlowGraph& dfg, GraphFormat format) {
  if (format == GraphFormat::Json) {
    nlohmann::ordered_json j;
    j["function_id"] = dfg.function_id;
    j["nodes"] = nlohmann::ordered_json::array();
    for (const DfgNode& n : dfg.nodes) {
      nlohmann::ordered_json node;
      node["id"] = n.node_id;
      node["name"] = n.name;
      node["token_index"] = n.token_index;
      node["kind"] = n.kind == DfgNodeKind::Constant ? "constant" : "variable";
      node["type"] = n.type_feature;
      j["nodes"].push_back(std::move(node));
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (auto [s, d] : dfg.edges) j["edges"].push_back({s, d});
    if (!dfg.back_edges.empty()) {
      j["back_edges"] = nlohmann::ordered_json::array();
      for (auto [s, d] : dfg.back_edges) j["back_edges"].push_back({s, d});
    }
    return j.dump();
  }

  std::ostringstream out;
  out << "digraph \"" << dot_escape(dfg.function_id) << "\" {\n";
  for (const DfgNode& n : dfg.nodes) {
    out << "  n" << n.node_id << " [label=\"" << dot_escape(n.name) << '@' << n.token_index << " : "
        << dot_escape(n.type_feature) << '"';
    if (n.kind == DfgNodeKind::Constant) out << ", shape=box";
    out << "];\n";
  }
  for (const DfgEdge& e : dfg.edges) {
    out << "  n" << e.first << " -> n" << e.second;
    if (std::binary_search(dfg.back_edges.begin(), dfg.back_edges.end(), e)) out << " [style=dashed]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

DataFlowGraph graph_from_json(std::string_view text) {
  DataFlowGraph g;
  try {
    auto j = nlohmann::json::parse(text);
    g.function_id = j.at("function_id").get<std::string>();
    for (const auto& node : j.at("nodes")) {
      DfgNode n;
      n.node_id = node.at("id").get<std::size_t>();
      n.name = node.at("name").get<std::string>();
      n.token_index = node.at("token_index").get<std::size_t>();
      const auto kind = node.at("kind").get<std::string>();
      if (kind != "variable" && kind != "constant") throw FormatError("unknown node kind '" + kind + "'");
      n.kind = kind == "constant" ? DfgNodeKind::Constant : DfgNodeKind::Variable;
      n.type_feature = node.at("type").get<std::string>();
      n.eval_order = n.token_index;
      g.nodes.push_back(std::move(n));
    }
    for (const auto& e : j.at("edges")) g.edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    if (j.contains("back_edges"))
      for (const auto& e : j.at("back_edges"))
        g.back_edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("graph JSON: ") + e.what());
  }
  std::sort(g.edges.begin(), g.edges.end());
  std::sort(g.back_edges.begin(), g.back_edges.end());
  g.validate();
  return g;
}

}  // namespace dfept
