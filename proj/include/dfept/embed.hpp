#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dfept/autodiff.hpp"
#include "dfept/dfg.hpp"

namespace dfept {

using ad::SubtokenPooling;

std::string_view to_string(SubtokenPooling pooling);
SubtokenPooling parse_subtoken_pooling(std::string_view tag);

enum class TokenizerMode {
  /// Lowercase, split on whitespace, every '*' is its own token.
  WhitespaceStar,
  /// As above, then greedy longest-prefix match of each piece against the vocabulary.
  LongestMatch,
};

/// Token <-> id map with PAD at 0 and UNK at 1.
class TypeVocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  TypeVocabulary();
  /// Tokens in id order; throws FormatError unless tokens[0] is PAD, tokens[1] is UNK and all are unique.
  explicit TypeVocabulary(std::vector<std::string> tokens);

  /// PAD, UNK, then `tokens` (deduplicated, reserved tokens skipped) in the given order.
  static TypeVocabulary from_tokens(const std::vector<std::string>& tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t, std::less<>> ids_;
};

struct EmbeddingTable {
  TypeVocabulary vocab;
  Matrix<float> matrix;
  TokenizerMode tokenizer = TokenizerMode::WhitespaceStar;

  std::size_t dim() const { return matrix.cols(); }
  void validate() const;
};

using NodeFeatureMatrix = Matrix<float>;

/// Lowercase split of a type string on whitespace and '*'. Never empty: "" -> [UNK].
std::vector<std::size_t> tokenize_type(std::string_view type_feature, const TypeVocabulary& vocab,
                                       TokenizerMode mode = TokenizerMode::WhitespaceStar);

/// The raw pieces tokenize_type looks up, before vocabulary mapping.
std::vector<std::string> split_type(std::string_view type_feature);

/// Row i = pooled table rows of tokenize_type(nodes[i].type_feature).
NodeFeatureMatrix embed_nodes(const DataFlowGraph& dfg, const EmbeddingTable& table,
                              SubtokenPooling pooling = SubtokenPooling::Mean);

/// Token id groups for every node, the input of ad::gather.
std::vector<std::vector<std::size_t>> node_token_ids(const DataFlowGraph& dfg, const EmbeddingTable& table);

/// Reads {"dim", "tokens", "matrix" | "matrix_path"}; a matrix_path names a
/// sibling binary: 8-byte magic "DFEPTEMB" then V*d little-endian float32.
EmbeddingTable load_embedding_table(const std::filesystem::path& path);

/// Writes the JSON descriptor, inline when `binary_name` is empty.
void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path,
                          const std::string& binary_name = {});

/// Entries i.i.d. uniform on [-0.1, 0.1] from `seed`.
EmbeddingTable init_random_table(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed);

/// Every token split_type produces for the graphs' type features, sorted.
std::vector<std::string> collect_type_tokens(const std::vector<DataFlowGraph>& graphs);

}  // namespace dfept
