#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "dfept/embed.hpp"

using namespace dfept;
namespace fs = std::filesystem;

namespace {

TypeVocabulary fixture_vocab() { return TypeVocabulary::from_tokens({"unsigned", "int", "char", "*"}); }

EmbeddingTable fixture_table() {
  EmbeddingTable t;
  t.vocab = fixture_vocab();
  t.matrix = Matrix<float>(t.vocab.size(), 4);
  for (std::size_t r = 0; r < t.matrix.rows(); ++r)
    for (std::size_t c = 0; c < 4; ++c) t.matrix(r, c) = static_cast<float>(r) + 0.25f * static_cast<float>(c);
  return t;
}

DataFlowGraph typed_graph(std::vector<std::string> types) {
  DataFlowGraph g;
  for (std::size_t i = 0; i < types.size(); ++i) {
    DfgNode n;
    n.node_id = i;
    n.name = "v" + std::to_string(i);
    n.token_index = i;
    n.type_feature = types[i];
    g.nodes.push_back(n);
  }
  return g;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("dfept_embed_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

template <class F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::IoError;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Vocabulary, ReservedIds) {
  TypeVocabulary v;
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.id("<pad>"), 0u);
  EXPECT_EQ(v.id("<unk>"), 1u);
  EXPECT_EQ(v.id("never-seen"), TypeVocabulary::kUnk);
}

TEST(Vocabulary, FromTokensDeduplicates) {
  auto v = TypeVocabulary::from_tokens({"int", "int", "<unk>", "char"});
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"<pad>", "<unk>", "int", "char"}));
}

TEST(Vocabulary, ExplicitListMustStartWithReserved) {
  EXPECT_EQ(error_kind([] { TypeVocabulary({"int", "<unk>"}); }), ErrorKind::FormatError);
  EXPECT_EQ(error_kind([] { TypeVocabulary({"<pad>", "<unk>", "a", "a"}); }), ErrorKind::FormatError);
}

TEST(Tokenize, UnsignedInt) {
  auto v = fixture_vocab();
  EXPECT_EQ(tokenize_type("unsigned int", v), (std::vector<std::size_t>{v.id("unsigned"), v.id("int")}));
}

TEST(Tokenize, EmptyIsUnk) {
  EXPECT_EQ(tokenize_type("", fixture_vocab()), std::vector<std::size_t>{TypeVocabulary::kUnk});
  EXPECT_EQ(tokenize_type("   ", fixture_vocab()), std::vector<std::size_t>{TypeVocabulary::kUnk});
}

TEST(Tokenize, CharPointer) {
  auto v = fixture_vocab();
  EXPECT_EQ(tokenize_type("char *", v), (std::vector<std::size_t>{v.id("char"), v.id("*")}));
  EXPECT_EQ(tokenize_type("char**", v), (std::vector<std::size_t>{v.id("char"), v.id("*"), v.id("*")}));
}

TEST(Tokenize, LowercasesAndMapsUnknown) {
  auto v = fixture_vocab();
  EXPECT_EQ(tokenize_type("INT size_t", v), (std::vector<std::size_t>{v.id("int"), TypeVocabulary::kUnk}));
}

TEST(Tokenize, LongestMatchSplitsPieces) {
  auto v = TypeVocabulary::from_tokens({"un", "unsigned", "int", "size", "_t"});
  EXPECT_EQ(tokenize_type("unsigned", v, TokenizerMode::LongestMatch), std::vector<std::size_t>{v.id("unsigned")});
  EXPECT_EQ(tokenize_type("size_t", v, TokenizerMode::LongestMatch),
            (std::vector<std::size_t>{v.id("size"), v.id("_t")}));
  EXPECT_EQ(tokenize_type("zz", v, TokenizerMode::LongestMatch), std::vector<std::size_t>{TypeVocabulary::kUnk});
}

TEST(EmbedNodes, SingleTokenCopiesRow) {
  auto t = fixture_table();
  auto x = embed_nodes(typed_graph({"int"}), t);
  ASSERT_EQ(x.rows(), 1u);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(x(0, c), t.matrix(t.vocab.id("int"), c));
}

TEST(EmbedNodes, SameTypeSameRow) {
  auto x = embed_nodes(typed_graph({"char *", "int", "char *"}), fixture_table());
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(x(0, c), x(2, c));
}

TEST(EmbedNodes, MeanOfSubtokens) {
  auto t = fixture_table();
  auto x = embed_nodes(typed_graph({"unsigned int"}), t);
  const std::size_t u = t.vocab.id("unsigned"), i = t.vocab.id("int");
  for (std::size_t c = 0; c < 4; ++c) EXPECT_FLOAT_EQ(x(0, c), (t.matrix(u, c) + t.matrix(i, c)) / 2);
}

TEST(EmbedNodes, SumAndFirstPooling) {
  auto t = fixture_table();
  auto g = typed_graph({"unsigned int"});
  const std::size_t u = t.vocab.id("unsigned"), i = t.vocab.id("int");
  auto s = embed_nodes(g, t, SubtokenPooling::Sum);
  auto f = embed_nodes(g, t, SubtokenPooling::First);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_FLOAT_EQ(s(0, c), t.matrix(u, c) + t.matrix(i, c));
    EXPECT_EQ(f(0, c), t.matrix(u, c));
  }
}

TEST(EmbedNodes, RowsBoundedByTableExtrema) {
  auto t = init_random_table({"a", "b", "c", "*"}, 16, 5);
  auto x = embed_nodes(typed_graph({"a b", "c * *", "b", "zzz a"}), t);
  for (std::size_t c = 0; c < 16; ++c) {
    float lo = t.matrix(0, c), hi = lo;
    for (std::size_t r = 0; r < t.matrix.rows(); ++r) lo = std::min(lo, t.matrix(r, c)), hi = std::max(hi, t.matrix(r, c));
    for (std::size_t r = 0; r < x.rows(); ++r) {
      EXPECT_GE(x(r, c), lo - 1e-7f);
      EXPECT_LE(x(r, c), hi + 1e-7f);
    }
  }
}

TEST(EmbedNodes, EmptyGraphHasNoRows) {
  auto x = embed_nodes(DataFlowGraph{}, fixture_table());
  EXPECT_EQ(x.rows(), 0u);
  EXPECT_EQ(x.cols(), 4u);
}

TEST(TableIo, InlineShapeEcho) {
  auto dir = scratch("inline");
  write_file(dir / "t.json",
             R"({"dim":4,"tokens":["<pad>","<unk>","int"],"matrix":[[0,0,0,0],[1,1,1,1],[0.5,0.25,-1,2]]})");
  auto t = load_embedding_table(dir / "t.json");
  EXPECT_EQ(t.matrix.rows(), 3u);
  EXPECT_EQ(t.matrix.cols(), 4u);
  EXPECT_EQ(t.dim(), 4u);
  EXPECT_EQ(t.matrix(2, 3), 2.0f);
}

TEST(TableIo, MissingUnkIsFormatError) {
  auto dir = scratch("nounk");
  write_file(dir / "t.json", R"({"dim":2,"tokens":["<pad>","int"],"matrix":[[0,0],[1,1]]})");
  EXPECT_EQ(error_kind([&] { load_embedding_table(dir / "t.json"); }), ErrorKind::FormatError);
}

TEST(TableIo, SchemaMismatchesAreFormatErrors) {
  auto dir = scratch("schema");
  const char* bad[] = {
      "{not json",
      R"({"tokens":["<pad>","<unk>"],"matrix":[[0],[0]]})",
      R"({"dim":2,"tokens":["<pad>","<unk>"],"matrix":[[0,0]]})",
      R"({"dim":2,"tokens":["<pad>","<unk>"],"matrix":[[0,0],[0]]})",
      R"({"dim":1,"tokens":["<pad>","<unk>"],"matrix":[[0],["x"]]})",
      R"({"dim":1,"tokens":["<pad>","<unk>"]})",
  };
  for (const char* text : bad) {
    write_file(dir / "t.json", text);
    EXPECT_EQ(error_kind([&] { load_embedding_table(dir / "t.json"); }), ErrorKind::FormatError) << text;
  }
}

TEST(TableIo, NonFiniteIsDataError) {
  auto dir = scratch("nan");
  auto t = fixture_table();
  save_embedding_table(t, dir / "t.json", "t.bin");
  // overwrite the first float after the 8-byte magic with a NaN
  std::fstream b(dir / "t.bin", std::ios::in | std::ios::out | std::ios::binary);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  char bytes[4];
  std::memcpy(bytes, &nan, 4);
  b.seekp(8);
  b.write(bytes, 4);
  b.close();
  EXPECT_EQ(error_kind([&] { load_embedding_table(dir / "t.json"); }), ErrorKind::DataError);
}

TEST(TableIo, BadMagicAndLengthAreFormatErrors) {
  auto dir = scratch("magic");
  save_embedding_table(fixture_table(), dir / "t.json", "t.bin");
  {
    std::ofstream b(dir / "t.bin", std::ios::app | std::ios::binary);
    b.put(0);
  }
  EXPECT_EQ(error_kind([&] { load_embedding_table(dir / "t.json"); }), ErrorKind::FormatError);
  {
    std::fstream b(dir / "t.bin", std::ios::in | std::ios::out | std::ios::binary);
    b.write("XXXX", 4);
  }
  EXPECT_EQ(error_kind([&] { load_embedding_table(dir / "t.json"); }), ErrorKind::FormatError);
}

TEST(TableIo, MissingFileIsIoError) {
  EXPECT_EQ(error_kind([] { load_embedding_table("/nonexistent/table.json"); }), ErrorKind::IoError);
}

TEST(TableIo, RoundTripIsBitwise) {
  auto dir = scratch("roundtrip");
  auto t = init_random_table({"int", "char", "*", "unsigned"}, 7, 42);
  save_embedding_table(t, dir / "inline.json");
  save_embedding_table(t, dir / "bin.json", "bin.bin");
  for (const char* name : {"inline.json", "bin.json"}) {
    auto back = load_embedding_table(dir / name);
    EXPECT_EQ(back.vocab.tokens(), t.vocab.tokens()) << name;
    ASSERT_EQ(back.matrix.size(), t.matrix.size());
    EXPECT_EQ(std::memcmp(back.matrix.data().data(), t.matrix.data().data(), t.matrix.size() * sizeof(float)), 0)
        << name;
  }
}

TEST(TableIo, TokenizerModeSurvivesRoundTrip) {
  auto dir = scratch("tok");
  auto t = fixture_table();
  t.tokenizer = TokenizerMode::LongestMatch;
  save_embedding_table(t, dir / "t.json");
  EXPECT_EQ(load_embedding_table(dir / "t.json").tokenizer, TokenizerMode::LongestMatch);
}

TEST(InitRandom, SameSeedBitwiseEqual) {
  auto a = init_random_table({"int", "char"}, 32, 7);
  auto b = init_random_table({"int", "char"}, 32, 7);
  EXPECT_EQ(a.matrix, b.matrix);
}

TEST(InitRandom, DifferentSeedsDiffer) {
  EXPECT_NE(init_random_table({"int", "char"}, 32, 7).matrix, init_random_table({"int", "char"}, 32, 8).matrix);
}

TEST(InitRandom, EntriesInRange) {
  auto t = init_random_table({"int", "char", "long"}, 64, 1);
  EXPECT_EQ(t.matrix.rows(), 5u);
  for (float x : t.matrix.data()) {
    EXPECT_GE(x, -0.1f);
    EXPECT_LE(x, 0.1f);
  }
}

TEST(InitRandom, ZeroWidthIsInvalid) {
  EXPECT_EQ(error_kind([] { init_random_table({"int"}, 0, 1); }), ErrorKind::InvalidDimension);
}

TEST(CollectTokens, SortedUnique) {
  auto toks = collect_type_tokens({typed_graph({"char *", "unsigned int", "int"})});
  EXPECT_EQ(toks, (std::vector<std::string>{"*", "char", "int", "unsigned"}));
}

TEST(NodeTokenIds, MatchesTokenizer) {
  auto t = fixture_table();
  auto ids = node_token_ids(typed_graph({"char *", ""}), t);
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(ids[0], tokenize_type("char *", t.vocab));
  EXPECT_EQ(ids[1], std::vector<std::size_t>{TypeVocabulary::kUnk});
}
