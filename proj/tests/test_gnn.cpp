#include <gtest/gtest.h>

#include "gnn_checks.hpp"

using namespace dfept;
using namespace dfept::testing;

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

GcnStack<double> identity_stack(std::size_t d, std::size_t depth = 1) {
  GcnStack<double> s;
  for (std::size_t k = 0; k < depth; ++k) s.weights.emplace_back("w", Matrix<double>::identity(d));
  return s;
}

GgnnCell<double> zero_cell(std::size_t d, std::size_t steps) {
  GgnnCell<double> c;
  for (auto* p : {&c.w_update, &c.u_update, &c.w_reset, &c.u_reset, &c.w_out, &c.u_out}) *p = {"z", Matrix<double>(d, d)};
  c.steps = steps;
  return c;
}

const std::vector<RandomGnnCase>& cases() {
  static const auto c = random_gnn_cases(50, 1234);
  return c;
}

}  // namespace

TEST(Adjacency, IsolatedNodeSymmetric) {
  EXPECT_EQ(normalize_adjacency(1, {}, AdjacencyMode::Symmetric).dense(), Matrix<double>({{1.0}}));
}

TEST(Adjacency, TwoNodeFixtures) {
  const CheckResult r = adjacency_fixtures();
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_LE(r.worst, 1e-7);
}

TEST(Adjacency, EmptyGraphRejected) {
  EXPECT_EQ(error_kind([] { normalize_adjacency(0, {}, AdjacencyMode::Symmetric); }), ErrorKind::EmptyGraph);
  EXPECT_EQ(error_kind([] { normalize_adjacency(DataFlowGraph{}, AdjacencyMode::DirectedRow); }),
            ErrorKind::EmptyGraph);
}

TEST(Adjacency, IsolatedNodesKeepUnitSelfRow) {
  const auto a = normalize_adjacency(4, {{0, 1}}, AdjacencyMode::Symmetric).dense();
  for (std::size_t v : {2u, 3u})
    for (std::size_t u = 0; u < 4; ++u) EXPECT_EQ(a(v, u), u == v ? 1.0 : 0.0);
}

TEST(Adjacency, RandomGraphsSymmetricAndStochastic) {
  const CheckResult r = adjacency_random(100, 99);
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_EQ(r.trials, 100u);
}

TEST(Adjacency, FromGraphUsesEdges) {
  DataFlowGraph g = extract_dfg({"f", "int a = b;", {}});
  EXPECT_EQ(normalize_adjacency(g, AdjacencyMode::DirectedRow).dense(), Matrix<double>({{0.5, 0.5}, {0.0, 1.0}}));
}

TEST(Adjacency, ModeTags) {
  EXPECT_EQ(parse_adjacency_mode("symmetric"), AdjacencyMode::Symmetric);
  EXPECT_EQ(parse_adjacency_mode(to_string(AdjacencyMode::DirectedRow)), AdjacencyMode::DirectedRow);
  EXPECT_THROW(parse_adjacency_mode("laplacian"), Error);
}

TEST(Gcn, IdentityPropagationKeepsNonNegativeInput) {
  NormalizedAdjacency eye = normalize_adjacency(3, {}, AdjacencyMode::Symmetric);
  Matrix<double> x{{0.0, 1.5}, {2.0, 0.25}, {3.0, 4.0}};
  auto s = identity_stack(2, 2);
  EXPECT_EQ(gcn_forward(x, eye, s), x);
}

TEST(Gcn, RectifierClips) {
  auto s = identity_stack(2);
  EXPECT_EQ(gcn_forward(Matrix<double>{{-1.0, 2.0}}, normalize_adjacency(1, {}, AdjacencyMode::Symmetric), s),
            Matrix<double>({{0.0, 2.0}}));
}

TEST(Gcn, TwoNodePath) {
  auto s = identity_stack(2);
  auto out = gcn_forward(Matrix<double>{{1, 0}, {0, 1}}, normalize_adjacency(2, {{0, 1}}, AdjacencyMode::Symmetric), s);
  for (double v : out.data()) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(Gcn, WidthMismatchIsShapeError) {
  auto s = GcnStack<double>::init({3, 2}, 1);
  EXPECT_EQ(error_kind([&] { gcn_forward(Matrix<double>(2, 4), normalize_adjacency(2, {}, AdjacencyMode::Symmetric), s); }),
            ErrorKind::ShapeError);
  s.weights.emplace_back("bad", Matrix<double>(5, 2));
  EXPECT_EQ(error_kind([&] { s.validate(); }), ErrorKind::ShapeError);
}

TEST(Gcn, InitRejectsZeroWidth) {
  EXPECT_EQ(error_kind([] { GcnStack<double>::init({3, 0}, 1); }), ErrorKind::InvalidDimension);
  EXPECT_EQ(error_kind([] { GcnStack<double>::init({3}, 1); }), ErrorKind::InvalidDimension);
}

TEST(Gcn, GlorotRangeAndDeterminism) {
  auto a = GcnStack<float>::init({8, 4, 2}, 77);
  auto b = GcnStack<float>::init({8, 4, 2}, 77);
  EXPECT_EQ(a.weights[0].value, b.weights[0].value);
  EXPECT_EQ(a.weights[1].value, b.weights[1].value);
  const float lim = std::sqrt(6.0f / 12.0f);
  for (float v : a.weights[0].value.data()) EXPECT_LE(std::abs(v), lim);
}

TEST(Ggnn, ZeroWeightsHalveState) {
  // a = h on an isolated node, z = r = 0.5, candidate 0
  for (double h0 : {3.0, -2.0}) {
    auto c = zero_cell(1, 1);
    auto out = ggnn_forward(Matrix<double>{{h0}}, normalize_adjacency(1, {}, AdjacencyMode::Symmetric), c);
    EXPECT_DOUBLE_EQ(out(0, 0), 0.5 * h0);
  }
}

TEST(Ggnn, ZeroWeightsOnLargerGraph) {
  auto c = zero_cell(3, 1);
  Matrix<double> x{{1, -2, 3}, {0.5, 0, -1}};
  auto out = ggnn_forward(x, normalize_adjacency(2, {{0, 1}}, AdjacencyMode::Symmetric), c);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(out.data()[i], 0.5 * x.data()[i]);
}

TEST(Ggnn, EqualStatesStayEqualOnSymmetricGraph) {
  // 4-cycle: every node is equivalent
  auto adj = normalize_adjacency(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, AdjacencyMode::Symmetric);
  auto c = GgnnCell<double>::init(3, 5, 11);
  Matrix<double> x(4, 3);
  for (std::size_t i = 0; i < 4; ++i) x(i, 0) = 0.3, x(i, 1) = -0.7, x(i, 2) = 1.1;
  auto out = ggnn_forward(x, adj, c);
  for (std::size_t i = 1; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(out(i, j), out(0, j), 1e-14);
}

TEST(Ggnn, ClosedUpdateGateLeavesStateUnchanged) {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 1 + rng.below(6), d = 1 + rng.below(4);
    ref::RandomGraph g = ref::random_graph(rng, n, n, 0.4);
    auto adj = normalize_adjacency(g.n, {g.edges.begin(), g.edges.end()}, AdjacencyMode::Symmetric);
    auto c = GgnnCell<double>::init(d, 3, rng.next());
    c.w_update.value.fill(-1000.0);
    c.u_update.value.fill(-1000.0);
    Matrix<double> x(g.n, d);
    for (double& v : x.data()) v = rng.uniform(0.5, 1.0);  // keeps the gate pre-activation very negative
    EXPECT_EQ(ggnn_forward(x, adj, c), x);
  }
}

TEST(Ggnn, ShapeErrorsAndInit) {
  auto c = GgnnCell<double>::init(3, 2, 1);
  EXPECT_EQ(error_kind([&] { ggnn_forward(Matrix<double>(1, 2), normalize_adjacency(1, {}, AdjacencyMode::Symmetric), c); }),
            ErrorKind::ShapeError);
  EXPECT_EQ(error_kind([] { GgnnCell<double>::init(3, 0, 1); }), ErrorKind::InvalidDimension);
  EXPECT_EQ(error_kind([] { GgnnCell<double>::init(0, 1, 1); }), ErrorKind::InvalidDimension);
  c.u_out.value = Matrix<double>(3, 2);
  EXPECT_EQ(error_kind([&] { c.validate(); }), ErrorKind::ShapeError);
}

TEST(RandomGraphs, MatchDenseRecurrence) {
  const CheckResult r = gnn_bruteforce(cases());
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_EQ(r.trials, 50u);
}

TEST(RandomGraphs, KHopLocality) {
  const CheckResult r = khop_locality(cases());
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(RandomGraphs, KHopLocalityIsNotVacuous) {
  // a 5-node path with one layer: far nodes stay put, the neighbour moves
  auto c = cases().front();
  c.graph = {5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}};
  c.d = 2;
  c.depth = 1;
  c.x = ref::zeros(5, 2);
  auto s = GcnStack<double>::init({2, 2}, 3);
  s.weights[0].value = Matrix<double>::identity(2);
  auto adj = normalize_adjacency(5, c.edges(), AdjacencyMode::Symmetric);
  Matrix<double> x(5, 2, 0.1), y = x;
  y(0, 0) += 1.0;
  auto a = gcn_forward(x, adj, s), b = gcn_forward(y, adj, s);
  EXPECT_NE(a(1, 0), b(1, 0));
  EXPECT_EQ(a(2, 0), b(2, 0));
  EXPECT_EQ(a(4, 0), b(4, 0));
}

TEST(RandomGraphs, PermutationEquivariance) {
  const CheckResult r = permutation_equivariance(cases(), 4321);
  EXPECT_TRUE(r.pass) << r.detail;
}
