#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfept/error.hpp"

namespace dfept {

/// One C function as it appears in a corpus.
struct SourceFunction {
  std::string id;
  std::string code;
  std::optional<int> label;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct SyntaxNode {
  std::string kind;
  /// Field name under which this node hangs off its parent ("declarator", "value", ...), empty if none.
  std::string field;
  Span span;
  std::vector<NodeId> children;
  NodeId parent = kNoNode;
  bool named = false;
  /// ERROR node or a zero-width token the parser inserted to recover.
  bool error = false;
  bool missing = false;
  /// Part of a comment or a preprocessor directive line; never a data-flow token.
  bool directive = false;

  bool is_leaf() const { return children.empty(); }
};

/// Immutable syntax tree that owns a copy of its source text.
class SyntaxTree {
 public:
  SyntaxTree(std::string source, std::vector<SyntaxNode> nodes, NodeId root);

  const std::string& source() const { return source_; }
  const SyntaxNode& node(NodeId id) const { return nodes_.at(id); }
  const SyntaxNode& root() const { return nodes_.at(root_); }
  NodeId root_id() const { return root_; }
  std::size_t size() const { return nodes_.size(); }

  std::string_view text(NodeId id) const;
  std::string_view text(const SyntaxNode& n) const;

  /// First child attached under `field`, or kNoNode.
  NodeId child_by_field(NodeId id, std::string_view field) const;
  std::vector<NodeId> children_by_field(NodeId id, std::string_view field) const;

  bool has_error() const { return first_error_.has_value(); }
  std::optional<Span> first_error() const { return first_error_; }
  /// Number of ERROR/MISSING nodes in the tree.
  std::size_t error_count() const { return error_count_; }

  /// All leaves in source order, comments and directives included.
  std::vector<NodeId> leaves() const;

 private:
  std::string source_;
  std::vector<SyntaxNode> nodes_;
  NodeId root_;
  std::optional<Span> first_error_;
  std::size_t error_count_ = 0;
};

struct LeafToken {
  std::size_t token_index;
  NodeId node;
};

/// Parse one function with the tree-sitter C grammar.
///
/// Throws Error(EmptySource) for blank input, FormatError for invalid UTF-8, and
/// ParseRejected when `strict` is set and the tree contains a grammar-error node.
SyntaxTree parse_function(const SourceFunction& source, bool strict = false);

/// Data-flow-relevant leaves in span order: whitespace, comments, preprocessor
/// directives and parser-inserted tokens are skipped.
std::vector<LeafToken> leaf_tokens(const SyntaxTree& tree);

/// S-expression rendering for debugging.
std::string to_sexpr(const SyntaxTree& tree);

bool is_valid_utf8(std::string_view text);

}  // namespace dfept
