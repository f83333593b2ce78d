#include "dfept/ast.hpp"

#include <tree_sitter/api.h>

#include <algorithm>
#include <array>
#include <memory>

extern "C" const TSLanguage* tree_sitter_c(void);

namespace dfept {
namespace {

// Literal productions flattened into a single leaf so their text is one token.
constexpr std::array<std::string_view, 8> kAtomicKinds = {
    "string_literal", "char_literal", "null", "true", "false", "system_lib_string", "raw_string_literal",
    "number_literal"};

// Whole subtree is a directive line.
constexpr std::array<std::string_view, 5> kDirectiveKinds = {"preproc_include", "preproc_def",
                                                             "preproc_function_def", "preproc_call",
                                                             "preproc_arg"};

// Conditional-compilation blocks: the "#if..." tokens and their condition are
// directives, the guarded code is not.
constexpr std::array<std::string_view, 6> kConditionalKinds = {"preproc_if",   "preproc_ifdef",
                                                               "preproc_else", "preproc_elif",
                                                               "preproc_elifdef", "preproc_ifndef"};

template <std::size_t N>
bool one_of(std::string_view kind, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), kind) != set.end();
}

struct ParserDeleter {
  void operator()(TSParser* p) const { ts_parser_delete(p); }
};
struct TreeDeleter {
  void operator()(TSTree* t) const { ts_tree_delete(t); }
};

struct Converter {
  std::vector<SyntaxNode> nodes;

  NodeId convert(TSNode ts, NodeId parent, const char* field, bool in_directive) {
    const NodeId id = static_cast<NodeId>(nodes.size());
    nodes.emplace_back();
    {
      SyntaxNode& n = nodes.back();
      n.kind = ts_node_type(ts);
      n.field = field ? field : "";
      n.span = {ts_node_start_byte(ts), ts_node_end_byte(ts)};
      n.parent = parent;
      n.named = ts_node_is_named(ts);
      n.missing = ts_node_is_missing(ts);
      n.error = ts_node_is_error(ts) || n.missing;
    }
    const std::string kind = nodes[id].kind;
    const bool conditional = one_of(kind, kConditionalKinds);
    bool directive = in_directive || kind == "comment" || one_of(kind, kDirectiveKinds);
    nodes[id].directive = directive;
    if (one_of(kind, kAtomicKinds)) return id;

    const std::uint32_t count = ts_node_child_count(ts);
    std::vector<NodeId> children;
    children.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      TSNode child = ts_node_child(ts, i);
      const char* child_field = ts_node_field_name_for_child(ts, i);
      bool child_directive = directive;
      if (conditional) {
        std::string_view ck = ts_node_type(child);
        std::string_view cf = child_field ? child_field : "";
        if ((!ts_node_is_named(child) && ck.starts_with("#")) || cf == "name" || cf == "condition")
          child_directive = true;
      }
      children.push_back(convert(child, id, child_field, child_directive));
    }
    nodes[id].children = std::move(children);
    return id;
  }
};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); });
}

}  // namespace

SyntaxTree::SyntaxTree(std::string source, std::vector<SyntaxNode> nodes, NodeId root)
    : source_(std::move(source)), nodes_(std::move(nodes)), root_(root) {
  // Pre-order traversal visits nodes in source order, so the first error seen is the earliest.
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    const SyntaxNode& n = nodes_[id];
    if (n.error) {
      ++error_count_;
      if (!first_error_) first_error_ = n.span;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
}

std::string_view SyntaxTree::text(NodeId id) const { return text(node(id)); }

std::string_view SyntaxTree::text(const SyntaxNode& n) const {
  return std::string_view(source_).substr(n.span.start, n.span.end - n.span.start);
}

NodeId SyntaxTree::child_by_field(NodeId id, std::string_view field) const {
  for (NodeId c : node(id).children)
    if (nodes_[c].field == field) return c;
  return kNoNode;
}

std::vector<NodeId> SyntaxTree::children_by_field(NodeId id, std::string_view field) const {
  std::vector<NodeId> out;
  for (NodeId c : node(id).children)
    if (nodes_[c].field == field) out.push_back(c);
  return out;
}

std::vector<NodeId> SyntaxTree::leaves() const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    const SyntaxNode& n = nodes_[id];
    if (n.is_leaf()) {
      out.push_back(id);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > text.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong encodings and surrogates
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += len;
  }
  return true;
}

SyntaxTree parse_function(const SourceFunction& source, bool strict) {
  if (is_blank(source.code)) throw Error(ErrorKind::EmptySource, "function '" + source.id + "' has no code");
  if (!is_valid_utf8(source.code)) throw FormatError("function '" + source.id + "' is not valid UTF-8");

  std::unique_ptr<TSParser, ParserDeleter> parser(ts_parser_new());
  ts_parser_set_language(parser.get(), tree_sitter_c());
  std::unique_ptr<TSTree, TreeDeleter> ts_tree(ts_parser_parse_string(
      parser.get(), nullptr, source.code.data(), static_cast<std::uint32_t>(source.code.size())));
  if (!ts_tree) throw Error(ErrorKind::ParseRejected, "parser returned no tree");

  Converter conv;
  NodeId root = conv.convert(ts_tree_root_node(ts_tree.get()), kNoNode, nullptr, false);
  SyntaxTree tree(source.code, std::move(conv.nodes), root);
  if (strict && tree.has_error()) throw ParseRejected(*tree.first_error());
  return tree;
}

std::vector<LeafToken> leaf_tokens(const SyntaxTree& tree) {
  std::vector<LeafToken> out;
  for (NodeId id : tree.leaves()) {
    const SyntaxNode& n = tree.node(id);
    if (n.directive || n.missing || n.span.start == n.span.end) continue;
    if (is_blank(tree.text(n))) continue;
    out.push_back({out.size(), id});
  }
  return out;
}

namespace {

void append_quoted(std::string& out, std::string_view text) {
  out += '"';
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}

void render(const SyntaxTree& tree, NodeId id, std::string& out) {
  const SyntaxNode& n = tree.node(id);
  if (!n.field.empty()) out += n.field + ": ";
  if (!n.named && n.is_leaf()) {
    append_quoted(out, n.missing ? std::string_view("MISSING") : tree.text(n));
    return;
  }
  out += '(';
  out += n.missing ? "MISSING " + n.kind : n.kind;
  if (n.is_leaf()) {
    out += ' ';
    append_quoted(out, tree.text(n));
  }
  for (NodeId c : n.children) {
    out += ' ';
    render(tree, c, out);
  }
  out += ')';
}

}  // namespace

std::string to_sexpr(const SyntaxTree& tree) {
  std::string out;
  render(tree, tree.root_id(), out);
  return out;
}

}  // namespace dfept
