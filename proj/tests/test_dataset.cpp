#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dfept/dataset.hpp"
#include "dfept/rng.hpp"

using namespace dfept;
namespace fs = std::filesystem;

namespace {

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

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_jsonl(in, "mem");
}

Corpus numbered(std::size_t n) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) c.samples.push_back({"s" + std::to_string(i), "int f(){}", static_cast<int>(i % 2)});
  return c;
}

std::vector<std::string> ids(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& s : c.samples) out.push_back(s.id);
  return out;
}

/// Predictions/labels realising the given confusion counts.
std::pair<std::vector<int>, std::vector<int>> confusion(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  std::vector<int> p, l;
  auto add = [&](std::size_t k, int pred, int label) {
    for (std::size_t i = 0; i < k; ++i) p.push_back(pred), l.push_back(label);
  };
  add(tp, 1, 1);
  add(tn, 0, 0);
  add(fp, 1, 0);
  add(fn, 0, 1);
  return {p, l};
}

}  // namespace

TEST(LoadJsonl, TwoLineFixture) {
  const fs::path p = fs::path(::testing::TempDir()) / "dfept_two.jsonl";
  std::ofstream(p) << R"({"func":"int a(){return 0;}","target":1,"idx":10})" << "\n"
                   << R"({"func":"void b(){}","target":0})" << "\n";
  Corpus c = load_jsonl(p);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.samples[0].id, "10");
  EXPECT_EQ(c.samples[0].label, 1);
  EXPECT_EQ(c.samples[1].id, "1");  // line number, 0-based
  EXPECT_EQ(c.samples[1].label, 0);
  EXPECT_EQ(c.samples[1].code, "void b(){}");
}

TEST(LoadJsonl, BlankLinesSkippedOrderKept) {
  Corpus c = parse("\n" R"({"func":"x","target":0,"idx":"b"})" "\n\n" R"({"func":"y","target":1,"idx":"a"})" "\n");
  EXPECT_EQ(ids(c), (std::vector<std::string>{"b", "a"}));
}

TEST(LoadJsonl, MissingFuncReportsLine) {
  try {
    parse(R"({"func":"x","target":0})" "\n" R"({"target":1})" "\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.kind(), ErrorKind::FormatError);
  }
}

TEST(LoadJsonl, MalformedLines) {
  for (const char* bad : {"{oops", "[1,2]", R"({"func":"x"})", R"({"func":"x","target":"1"})", R"({"func":1,"target":1})",
                          R"({"func":"x","target":1,"idx":[1]})"}) {
    EXPECT_EQ(error_kind([&] { parse(bad); }), ErrorKind::FormatError) << bad;
  }
}

TEST(LoadJsonl, TargetOutsideBinaryIsDataError) {
  EXPECT_EQ(error_kind([] { parse(R"({"func":"x","target":2})"); }), ErrorKind::DataError);
  EXPECT_EQ(error_kind([] { parse(R"({"func":"x","target":-1})"); }), ErrorKind::DataError);
}

TEST(LoadJsonl, DuplicateIdsAndMissingFile) {
  EXPECT_EQ(error_kind([] { parse(R"({"func":"x","target":0,"idx":1})" "\n" R"({"func":"y","target":0,"idx":1})"); }),
            ErrorKind::DataError);
  EXPECT_EQ(error_kind([] { load_jsonl("/nonexistent/data.jsonl"); }), ErrorKind::IoError);
}

TEST(Split, DevignSizes) {
  const SplitSizes s = split_sizes(27318);
  EXPECT_EQ(s.train, 21854u);
  EXPECT_EQ(s.valid, 2732u);
  EXPECT_EQ(s.test, 2732u);
}

TEST(Split, SmallSizes) {
  auto s = split_sizes(10);
  EXPECT_EQ(std::tie(s.train, s.valid, s.test), std::make_tuple(8u, 1u, 1u));
  s = split_sizes(3);
  EXPECT_EQ(std::tie(s.train, s.valid, s.test), std::make_tuple(2u, 1u, 0u));
  s = split_sizes(13);  // remainder 3: valid takes the extra one
  EXPECT_EQ(std::tie(s.train, s.valid, s.test), std::make_tuple(10u, 2u, 1u));
}

TEST(Split, SizesAlwaysPartition) {
  for (std::size_t n = 3; n < 500; ++n) {
    auto s = split_sizes(n);
    EXPECT_EQ(s.train + s.valid + s.test, n);
    EXPECT_EQ(s.train, n * 8 / 10);
    EXPECT_TRUE(s.valid == s.test || s.valid == s.test + 1);
  }
}

TEST(Split, DisjointAndExhaustive) {
  Corpus c = numbered(101);
  for (auto strategy : {SplitStrategy::Sequential, SplitStrategy::Shuffled}) {
    CorpusSplit sp = split(c, {7, strategy});
    std::vector<std::string> all = ids(sp.train), v = ids(sp.valid), t = ids(sp.test);
    all.insert(all.end(), v.begin(), v.end());
    all.insert(all.end(), t.begin(), t.end());
    std::vector<std::string> want = ids(c);
    std::sort(all.begin(), all.end());
    std::sort(want.begin(), want.end());
    EXPECT_EQ(all, want);
    EXPECT_EQ(sp.train.size(), 80u);
    EXPECT_EQ(sp.valid.size(), 11u);
    EXPECT_EQ(sp.test.size(), 10u);
  }
}

TEST(Split, SequentialKeepsFileOrder) {
  CorpusSplit sp = split(numbered(10), {0, SplitStrategy::Sequential});
  EXPECT_EQ(sp.train.samples.front().id, "s0");
  EXPECT_EQ(sp.valid.samples.front().id, "s8");
  EXPECT_EQ(sp.test.samples.front().id, "s9");
}

TEST(Split, ShuffledIsSeeded) {
  Corpus c = numbered(50);
  EXPECT_EQ(ids(split(c, {3, SplitStrategy::Shuffled}).train), ids(split(c, {3, SplitStrategy::Shuffled}).train));
  EXPECT_NE(ids(split(c, {3, SplitStrategy::Shuffled}).train), ids(split(c, {4, SplitStrategy::Shuffled}).train));
  EXPECT_NE(ids(split(c, {3, SplitStrategy::Shuffled}).train), ids(split(c, {3, SplitStrategy::Sequential}).train));
}

TEST(Split, TooSmall) { EXPECT_EQ(error_kind([] { split(numbered(2), {}); }), ErrorKind::TooSmall); }

TEST(Manifest, AppliesIdLists) {
  const fs::path p = fs::path(::testing::TempDir()) / "dfept_manifest.json";
  std::ofstream(p) << R"({"train":["s3","s1"],"valid":["s0"],"test":["s2"]})";
  CorpusSplit sp = apply_manifest(numbered(4), load_split_manifest(p));
  EXPECT_EQ(ids(sp.train), (std::vector<std::string>{"s3", "s1"}));
  EXPECT_EQ(ids(sp.valid), std::vector<std::string>{"s0"});
  EXPECT_EQ(ids(sp.test), std::vector<std::string>{"s2"});
}

TEST(Manifest, Errors) {
  EXPECT_EQ(error_kind([] { apply_manifest(numbered(3), {{"zz"}, {}, {}}); }), ErrorKind::DataError);
  EXPECT_EQ(error_kind([] { apply_manifest(numbered(3), {{"s0"}, {"s0"}, {}}); }), ErrorKind::DataError);
  const fs::path p = fs::path(::testing::TempDir()) / "dfept_bad_manifest.json";
  std::ofstream(p) << R"({"train":"s0"})";
  EXPECT_EQ(error_kind([&] { load_split_manifest(p); }), ErrorKind::FormatError);
}

TEST(Metrics, Perfect) {
  auto m = compute_metrics({1, 0, 1, 0}, {1, 0, 1, 0});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, SymmetricCounts) {
  auto [p, l] = confusion(1, 1, 1, 1);
  auto m = compute_metrics(p, l);
  for (double v : {m.accuracy, m.precision, m.recall, m.f1}) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(Metrics, FourSevenths) {
  auto [p, l] = confusion(2, 5, 1, 2);
  auto m = compute_metrics(p, l);
  EXPECT_EQ(std::tie(m.tp, m.tn, m.fp, m.fn), std::make_tuple(2u, 5u, 1u, 2u));
  EXPECT_NEAR(m.accuracy, 0.7, 1e-12);
  EXPECT_NEAR(m.precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.recall, 0.5, 1e-12);
  EXPECT_NEAR(m.f1, 4.0 / 7.0, 1e-12);
}

TEST(Metrics, ZeroDivisionGivesZero) {
  auto none = compute_metrics({0, 0, 0}, {0, 0, 0});  // no positives predicted or present
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(none.accuracy, 1.0);
  auto wrong = compute_metrics({1, 1}, {0, 0});
  EXPECT_EQ(wrong.precision, 0.0);
  EXPECT_EQ(wrong.recall, 0.0);
  EXPECT_EQ(wrong.f1, 0.0);
}

TEST(Metrics, LengthContract) {
  EXPECT_EQ(error_kind([] { compute_metrics({1}, {1, 0}); }), ErrorKind::ContractViolation);
  EXPECT_EQ(error_kind([] { compute_metrics({}, {}); }), ErrorKind::ContractViolation);
}

TEST(Metrics, ClosedFormsOnRandomData) {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<int> p(n), l(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(rng.below(2)), l[i] = static_cast<int>(rng.below(2));
    auto m = compute_metrics(p, l);
    EXPECT_EQ(m.total(), n);
    EXPECT_EQ(m.accuracy, static_cast<double>(m.tp + m.tn) / static_cast<double>(n));
    if (m.precision + m.recall > 0)
      EXPECT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-12);
    // joint permutation leaves everything unchanged
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<int> pp(n), ll(n);
    for (std::size_t i = 0; i < n; ++i) pp[i] = p[perm[i]], ll[i] = l[perm[i]];
    auto q = compute_metrics(pp, ll);
    EXPECT_EQ(std::tie(q.tp, q.tn, q.fp, q.fn), std::tie(m.tp, m.tn, m.fp, m.fn));
    EXPECT_EQ(q.f1, m.f1);
  }
}

TEST(Metrics, JsonAndTable) {
  auto [p, l] = confusion(2, 5, 1, 2);
  auto m = compute_metrics(p, l);
  auto j = nlohmann::json::parse(metrics_json(m));
  EXPECT_EQ(j["tp"], 2);
  EXPECT_NEAR(j["f1"].get<double>(), 4.0 / 7.0, 1e-12);
  const std::string table = metrics_table(m);
  EXPECT_NE(table.find("accuracy"), std::string::npos);
  EXPECT_NE(table.find("f1"), std::string::npos);
}
