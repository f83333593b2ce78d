#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "dfept/model.hpp"
#include "reference.hpp"

using namespace dfept;
namespace ref = dfept::testing::ref;
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

FusionModel<double> zero_model(std::size_t in, std::size_t hidden) {
  auto m = FusionModel<double>::init(in, hidden, 1);
  for (auto* p : {&m.w1, &m.b1, &m.w2, &m.b2}) p->value.fill(0.0);
  return m;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("dfept_fusion_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Fuse, GraphFirstThenSequence) {
  GraphVector<float> g{{1, 2}, 3, true};
  EXPECT_EQ(fuse(g, std::vector<float>{3, 4}, 2), (std::vector<float>{1, 2, 3, 4}));
}

TEST(Fuse, ZeroSequenceGivesZeroTail) {
  GraphVector<float> g{{0.5f, -1.0f, 2.0f}, 2, true};
  auto f = fuse(g, std::vector<float>(4, 0.0f), 4);
  for (std::size_t j = 3; j < 7; ++j) EXPECT_EQ(f[j], 0.0f);
}

TEST(Fuse, SplitRecoversInputsBitwise) {
  Rng rng(2);
  GraphVector<float> g;
  std::vector<float> s;
  for (int i = 0; i < 5; ++i) g.values.push_back(static_cast<float>(rng.uniform(-9, 9)));
  for (int i = 0; i < 3; ++i) s.push_back(static_cast<float>(rng.uniform(-9, 9)));
  auto f = fuse(g, s, 3);
  EXPECT_EQ(std::memcmp(f.data(), g.values.data(), 5 * sizeof(float)), 0);
  EXPECT_EQ(std::memcmp(f.data() + 5, s.data(), 3 * sizeof(float)), 0);
}

TEST(Fuse, WidthMismatch) {
  EXPECT_EQ(error_kind([] { fuse(GraphVector<float>{{1}, 1, false}, std::vector<float>{1, 2}, 3); }),
            ErrorKind::ShapeError);
}

TEST(Forward, ZeroWeightsGiveEvenOdds) {
  auto m = zero_model(4, 3);
  auto p = forward(m, std::vector<double>{1, -2, 3, 4});
  EXPECT_EQ(p.logits, (std::array<double, 2>{0, 0}));
  EXPECT_EQ(p.probabilities, (std::array<double, 2>{0.5, 0.5}));
  EXPECT_EQ(p.label, 0);
}

TEST(Forward, HandComputedFixture) {
  auto m = zero_model(2, 2);
  m.w1.value = Matrix<double>::identity(2);  // hidden = relu([1, 0]) = [1, 0]
  m.w2.value = Matrix<double>::identity(2);
  auto p = forward(m, std::vector<double>{1, 0});
  EXPECT_EQ(p.logits, (std::array<double, 2>{1, 0}));
  EXPECT_NEAR(p.probabilities[0], 0.7310585786, 1e-9);
  EXPECT_NEAR(p.probabilities[1], 0.2689414214, 1e-9);
  EXPECT_EQ(p.label, 0);
}

TEST(Forward, MatchesDenseEvaluation) {
  auto m = FusionModel<double>::init(5, 3, 8);
  Rng rng(1);
  for (auto* p : {&m.b1, &m.b2})
    for (double& v : p->value.data()) v = rng.uniform(-1, 1);
  std::vector<double> z{0.3, -1.2, 0.8, 2.0, -0.1};
  auto h = ref::map(ref::add(ref::mul({z}, ref::dense(m.w1.value)), ref::dense(m.b1.value)), ref::relu);
  auto out = ref::add(ref::mul(h, ref::dense(m.w2.value)), ref::dense(m.b2.value));
  auto p = forward(m, z);
  EXPECT_NEAR(p.logits[0], out[0][0], 1e-14);
  EXPECT_NEAR(p.logits[1], out[0][1], 1e-14);
}

TEST(Forward, ProbabilitiesSumToOne) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    auto m = FusionModel<float>::init(6, 4, rng.next());
    std::vector<float> z;
    for (int i = 0; i < 6; ++i) z.push_back(static_cast<float>(rng.uniform(-5, 5)));
    auto p = forward(m, z);
    EXPECT_NEAR(p.probabilities[0] + p.probabilities[1], 1.0, 1e-6);
  }
}

TEST(Forward, ShapeErrors) {
  auto m = FusionModel<double>::init(3, 2, 1);
  EXPECT_EQ(error_kind([&] { forward(m, std::vector<double>{1, 2}); }), ErrorKind::ShapeError);
  EXPECT_EQ(error_kind([] { FusionModel<double>::init(0, 2, 1); }), ErrorKind::InvalidDimension);
  m.w2.value = Matrix<double>(2, 3);
  EXPECT_EQ(error_kind([&] { m.validate(); }), ErrorKind::ShapeError);
}

TEST(Loss, EvenLogits) {
  EXPECT_NEAR(loss<double>({0, 0}, 0), 0.693147180560, 1e-12);
  EXPECT_NEAR(loss<double>({0, 0}, 1), 0.693147180560, 1e-12);
}

TEST(Loss, SaturatedIsStable) {
  const double l = loss<double>({100, -100}, 0);
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_NEAR(l, 0.0, 1e-12);
  EXPECT_NEAR(loss<double>({100, -100}, 1), 200.0, 1e-9);
}

TEST(Loss, ClosedForm) { EXPECT_NEAR(loss<double>({1, 0}, 1), 1.3132616875, 1e-9); }

TEST(Loss, ShiftInvariant) {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    std::array<double, 2> z{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const double c = rng.uniform(-50, 50);
    for (int label : {0, 1}) EXPECT_NEAR(loss(z, label), loss<double>({z[0] + c, z[1] + c}, label), 1e-6);
  }
}

TEST(Loss, TapeAgreesWithClosedForm) {
  Tape<double> t;
  auto l = ad::softmax_cross_entropy(t.constant(Matrix<double>{{1.0, 0.0}}), 1);
  EXPECT_NEAR(l.value()(0, 0), loss<double>({1, 0}, 1), 1e-15);
}

TEST(Loss, LabelMustBeBinary) { EXPECT_EQ(error_kind([] { loss<double>({0, 0}, 2); }), ErrorKind::ContractViolation); }

TEST(Predict, TieGoesToZero) {
  EXPECT_EQ(predicted_label<double>({0.5, 0.5}), 0);
  EXPECT_EQ(predicted_label<double>({0.2, 0.8}), 1);
  EXPECT_EQ(predicted_label<double>({0.8, 0.2}), 0);
}

TEST(SequencePolicy, ParsesTags) {
  auto z = parse_sequence_policy("zero", 16);
  EXPECT_EQ(z.kind, SequencePolicy::Kind::Zero);
  EXPECT_EQ(z.dim, 16u);
  auto r = parse_sequence_policy("random:77", 8);
  EXPECT_EQ(r.kind, SequencePolicy::Kind::Random);
  EXPECT_EQ(r.seed, 77u);
  auto f = parse_sequence_policy("/tmp/x.jsonl", 8);
  EXPECT_EQ(f.kind, SequencePolicy::Kind::File);
  EXPECT_EQ(error_kind([] { parse_sequence_policy("random:abc", 8); }), ErrorKind::UnsupportedFormat);
}

TEST(SequencePolicy, ZeroAndRandom) {
  auto zeros = resolve_sequence_embeddings(parse_sequence_policy("zero", 3), {"a", "b"});
  ASSERT_EQ(zeros.size(), 2u);
  EXPECT_EQ(zeros[1].vector, std::vector<float>(3, 0.0f));
  EXPECT_EQ(zeros[1].source, "zero");
  auto r1 = resolve_sequence_embeddings(parse_sequence_policy("random:5", 4), {"a", "b"});
  auto r2 = resolve_sequence_embeddings(parse_sequence_policy("random:5", 4), {"b", "a"});
  EXPECT_EQ(r1[0].vector, r2[1].vector);  // keyed by id, not position
  EXPECT_NE(r1[0].vector, r1[1].vector);
  EXPECT_EQ(error_kind([] { resolve_sequence_embeddings(parse_sequence_policy("zero", 0), {"a"}); }),
            ErrorKind::InvalidDimension);
}

TEST(SequencePolicy, FileLoading) {
  auto dir = scratch("seq");
  std::ofstream(dir / "s.jsonl") << R"({"id":"a","vector":[1,2]})" << "\n\n"
                                 << R"({"id":7,"vector":[3,4],"source":"enc"})" << "\n";
  auto got = resolve_sequence_embeddings(parse_sequence_policy((dir / "s.jsonl").string(), 0), {"7", "a"});
  EXPECT_EQ(got[0].vector, (std::vector<float>{3, 4}));
  EXPECT_EQ(got[0].source, "enc");
  EXPECT_EQ(got[1].vector, (std::vector<float>{1, 2}));
  EXPECT_EQ(error_kind([&] { resolve_sequence_embeddings(parse_sequence_policy((dir / "s.jsonl").string(), 0), {"zz"}); }),
            ErrorKind::DataError);
}

TEST(SequencePolicy, FileErrors) {
  auto dir = scratch("seqerr");
  std::ofstream(dir / "w.jsonl") << R"({"id":"a","vector":[1,2]})" << "\n" << R"({"id":"b","vector":[1]})" << "\n";
  EXPECT_EQ(error_kind([&] { load_sequence_embeddings(dir / "w.jsonl"); }), ErrorKind::ShapeError);
  std::ofstream(dir / "f.jsonl") << "{\"id\":\"a\"}\n";
  try {
    load_sequence_embeddings(dir / "f.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_EQ(error_kind([&] { load_sequence_embeddings(dir / "missing.jsonl"); }), ErrorKind::IoError);
}

// Branch ablations at the model level.

namespace {

Model small_model(ModelConfig cfg) {
  return Model::create(cfg, init_random_table({"int", "char", "*"}, 4, 3));
}

}  // namespace

TEST(Branches, SequenceOnlyWhenGraphIsEmpty) {
  ModelConfig cfg;
  cfg.seq_dim = 3;
  cfg.pe = PeMode::Off;
  Model m = small_model(cfg);
  GraphSample s;
  s.id = "empty";
  s.sequence = {0.5f, -1.0f, 2.0f};
  auto p = m.predict(s);
  // graph part is all zeros, so the prediction equals the classifier on [0 | seq]
  std::vector<float> fused(4, 0.0f);
  fused.insert(fused.end(), s.sequence.begin(), s.sequence.end());
  auto q = forward(m.fusion, fused);
  EXPECT_EQ(p.logits, q.logits);
}

TEST(Branches, GraphOnlyWithZeroSequence) {
  ModelConfig cfg;
  cfg.seq_dim = 2;
  Model m = small_model(cfg);
  auto table = init_random_table({"int", "char", "*"}, 4, 3);
  GraphSample s = make_sample(extract_dfg({"f", "void f(char *p) { int a = 1; g(p, a); }", {}}), table,
                              AdjacencyMode::Symmetric, {0.0f, 0.0f}, 1);
  auto p = m.predict(s);
  EXPECT_TRUE(std::isfinite(p.logits[0]) && std::isfinite(p.logits[1]));
  s.sequence = {0.0f};
  EXPECT_EQ(error_kind([&] { m.predict(s); }), ErrorKind::ShapeError);
}

TEST(Branches, ModelConfigValidation) {
  ModelConfig cfg;
  EXPECT_EQ(error_kind([&] { small_model(cfg); }), ErrorKind::InvalidDimension);  // seq_dim 0
  cfg.seq_dim = 2;
  cfg.depth = 0;
  EXPECT_EQ(error_kind([&] { small_model(cfg); }), ErrorKind::InvalidDimension);
}

TEST(Branches, HiddenDefaultsToHalfInput) {
  ModelConfig cfg;
  cfg.seq_dim = 6;
  Model m = small_model(cfg);
  EXPECT_EQ(m.fusion.input_width(), 10u);
  EXPECT_EQ(m.fusion.hidden(), 5u);
}

TEST(Branches, ConfigJsonRoundTrip) {
  ModelConfig cfg;
  cfg.gnn = GnnKind::Ggnn;
  cfg.depth = 3;
  cfg.pool = PoolMode::Max;
  cfg.pe = PeMode::PerNode;
  cfg.adjacency = AdjacencyMode::DirectedRow;
  cfg.seq_dim = 9;
  cfg.hidden = 7;
  cfg.seed = 123456789012345ull;
  cfg.back_edges = true;
  EXPECT_EQ(ModelConfig::from_json(cfg.to_json()).to_json().dump(), cfg.to_json().dump());
}
