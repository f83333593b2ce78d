#include "dfept/embed.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "dfept/rng.hpp"

namespace dfept {
namespace {

constexpr std::string_view kTableMagic = "DFEPTEMB";

std::string_view to_string(TokenizerMode mode) {
  return mode == TokenizerMode::LongestMatch ? "longest-match" : "whitespace-star";
}

TokenizerMode parse_tokenizer(std::string_view tag) {
  if (tag == "whitespace-star") return TokenizerMode::WhitespaceStar;
  if (tag == "longest-match") return TokenizerMode::LongestMatch;
  throw FormatError("unknown tokenizer '" + std::string(tag) + "'");
}

}  // namespace

std::string_view to_string(SubtokenPooling pooling) {
  switch (pooling) {
    case SubtokenPooling::Mean: return "mean";
    case SubtokenPooling::Sum: return "sum";
    case SubtokenPooling::First: return "first";
  }
  return "?";
}

SubtokenPooling parse_subtoken_pooling(std::string_view tag) {
  if (tag == "mean") return SubtokenPooling::Mean;
  if (tag == "sum") return SubtokenPooling::Sum;
  if (tag == "first") return SubtokenPooling::First;
  throw Error(ErrorKind::UnsupportedFormat, "unknown subtoken pooling '" + std::string(tag) + "'");
}

TypeVocabulary::TypeVocabulary() : TypeVocabulary(std::vector<std::string>{std::string(kPadToken), std::string(kUnkToken)}) {}

TypeVocabulary::TypeVocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < 2 || tokens_[kPad] != kPadToken || tokens_[kUnk] != kUnkToken)
    throw FormatError("vocabulary must start with \"<pad>\", \"<unk>\"");
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (!ids_.emplace(tokens_[i], i).second) throw FormatError("duplicate vocabulary token '" + tokens_[i] + "'");
}

TypeVocabulary TypeVocabulary::from_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> all{std::string(kPadToken), std::string(kUnkToken)};
  std::set<std::string, std::less<>> seen(all.begin(), all.end());
  for (const auto& t : tokens)
    if (seen.insert(t).second) all.push_back(t);
  return TypeVocabulary(std::move(all));
}

std::size_t TypeVocabulary::id(std::string_view token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

bool TypeVocabulary::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

void EmbeddingTable::validate() const {
  if (matrix.rows() != vocab.size())
    throw FormatError("embedding matrix has " + std::to_string(matrix.rows()) + " rows for a vocabulary of " +
                      std::to_string(vocab.size()));
  if (matrix.cols() == 0) throw Error(ErrorKind::InvalidDimension, "embedding width is zero");
  if (!matrix.all_finite()) throw Error(ErrorKind::DataError, "embedding matrix has a non-finite entry");
}

std::vector<std::string> split_type(std::string_view type_feature) {
  std::vector<std::string> pieces;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) pieces.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : type_feature) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '*') {
      flush();
      pieces.emplace_back("*");
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  flush();
  return pieces;
}

std::vector<std::size_t> tokenize_type(std::string_view type_feature, const TypeVocabulary& vocab,
                                       TokenizerMode mode) {
  std::vector<std::size_t> ids;
  for (const std::string& piece : split_type(type_feature)) {
    if (mode == TokenizerMode::WhitespaceStar) {
      ids.push_back(vocab.id(piece));
      continue;
    }
    std::size_t pos = 0;
    while (pos < piece.size()) {
      std::size_t len = piece.size() - pos;
      while (len > 0 && !vocab.contains(std::string_view(piece).substr(pos, len))) --len;
      if (len == 0) {
        ids.push_back(TypeVocabulary::kUnk);
        break;
      }
      ids.push_back(vocab.id(std::string_view(piece).substr(pos, len)));
      pos += len;
    }
  }
  if (ids.empty()) ids.push_back(TypeVocabulary::kUnk);
  return ids;
}

std::vector<std::vector<std::size_t>> node_token_ids(const DataFlowGraph& dfg, const EmbeddingTable& table) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(dfg.size());
  for (const DfgNode& n : dfg.nodes) out.push_back(tokenize_type(n.type_feature, table.vocab, table.tokenizer));
  return out;
}

NodeFeatureMatrix embed_nodes(const DataFlowGraph& dfg, const EmbeddingTable& table, SubtokenPooling pooling) {
  const std::size_t d = table.dim();
  NodeFeatureMatrix x(dfg.size(), d);
  for (std::size_t i = 0; i < dfg.size(); ++i) {
    auto ids = tokenize_type(dfg.nodes[i].type_feature, table.vocab, table.tokenizer);
    if (pooling == SubtokenPooling::First) ids.resize(1);
    auto row = x.row(i);
    for (std::size_t id : ids)
      for (std::size_t j = 0; j < d; ++j) row[j] += table.matrix(id, j);
    if (pooling == SubtokenPooling::Mean && ids.size() > 1)
      for (float& v : row) v /= static_cast<float>(ids.size());
  }
  return x;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open embedding table " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("embedding table " + path.string() + ": " + e.what());
  }

  EmbeddingTable table;
  std::size_t dim = 0;
  std::vector<std::string> tokens;
  try {
    dim = j.at("dim").get<std::size_t>();
    tokens = j.at("tokens").get<std::vector<std::string>>();
    if (j.contains("tokenizer")) table.tokenizer = parse_tokenizer(j.at("tokenizer").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("embedding table " + path.string() + ": " + e.what());
  }
  if (dim == 0) throw FormatError("embedding table dim must be positive");
  table.vocab = TypeVocabulary(std::move(tokens));
  const std::size_t v = table.vocab.size();
  table.matrix = Matrix<float>(v, dim);

  if (j.contains("matrix_path") && !j.at("matrix_path").is_null()) {
    const auto bin = path.parent_path() / j.at("matrix_path").get<std::string>();
    std::ifstream b(bin, std::ios::binary);
    if (!b) throw Error(ErrorKind::IoError, "cannot open embedding matrix " + bin.string());
    if (io::read_bytes(b, kTableMagic.size()) != kTableMagic) throw FormatError("bad embedding matrix magic");
    for (float& x : table.matrix.data()) x = io::read_f32(b);
    if (b.peek() != std::char_traits<char>::eof()) throw FormatError("embedding matrix longer than V*d floats");
  } else if (j.contains("matrix")) {
    const auto& rows = j.at("matrix");
    if (!rows.is_array() || rows.size() != v)
      throw FormatError("inline matrix must have one row per token (" + std::to_string(v) + ")");
    for (std::size_t r = 0; r < v; ++r) {
      if (!rows[r].is_array() || rows[r].size() != dim)
        throw FormatError("matrix row " + std::to_string(r) + " does not have dim entries");
      for (std::size_t c = 0; c < dim; ++c) {
        if (!rows[r][c].is_number()) throw FormatError("matrix entry is not a number");
        table.matrix(r, c) = rows[r][c].get<float>();
      }
    }
  } else {
    throw FormatError("embedding table needs \"matrix\" or \"matrix_path\"");
  }
  table.validate();
  return table;
}

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path,
                          const std::string& binary_name) {
  table.validate();
  nlohmann::ordered_json j;
  j["dim"] = table.dim();
  j["tokens"] = table.vocab.tokens();
  j["tokenizer"] = to_string(table.tokenizer);
  if (binary_name.empty()) {
    j["matrix"] = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < table.matrix.rows(); ++r) {
      auto row = table.matrix.row(r);
      j["matrix"].push_back(std::vector<float>(row.begin(), row.end()));
    }
  } else {
    j["matrix_path"] = binary_name;
    std::ofstream b(path.parent_path() / binary_name, std::ios::binary);
    if (!b) throw Error(ErrorKind::IoError, "cannot write " + binary_name);
    io::write_bytes(b, std::string(kTableMagic));
    for (float x : table.matrix.data()) io::write_f32(b, x);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << j.dump() << '\n';
}

EmbeddingTable init_random_table(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorKind::InvalidDimension, "embedding width must be at least 1");
  EmbeddingTable table;
  table.vocab = TypeVocabulary::from_tokens(tokens);
  table.matrix = Matrix<float>(table.vocab.size(), dim);
  Rng rng(seed);
  for (float& x : table.matrix.data()) x = static_cast<float>(rng.uniform(-0.1, 0.1));
  return table;
}

std::vector<std::string> collect_type_tokens(const std::vector<DataFlowGraph>& graphs) {
  std::set<std::string> tokens;
  for (const auto& g : graphs)
    for (const auto& n : g.nodes)
      for (auto& piece : split_type(n.type_feature)) tokens.insert(std::move(piece));
  return {tokens.begin(), tokens.end()};
}

}  // namespace dfept
