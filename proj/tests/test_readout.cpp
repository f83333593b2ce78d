#include <gtest/gtest.h>

#include "readout_checks.hpp"

using namespace dfept;
using namespace dfept::testing;

namespace {

AttentionReadout<double> readout(Matrix<double> gate_w, Matrix<double> trans_w) {
  AttentionReadout<double> r = AttentionReadout<double>::init(gate_w.rows(), 1);
  r.gate_w.value = std::move(gate_w);
  r.trans_w.value = std::move(trans_w);
  return r;
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

}  // namespace

TEST(Attention, ZeroStateGivesZero) {
  auto r = AttentionReadout<double>::init(3, 5);
  auto e = attend_nodes(Matrix<double>(2, 3), r);
  for (double v : e.data()) EXPECT_EQ(v, 0.0);
}

TEST(Attention, SaturatedGatePassesTransform) {
  Matrix<double> big = Matrix<double>::identity(2);
  for (double& v : big.data()) v *= 1e3;
  auto r = readout(big, Matrix<double>::identity(2));
  auto e = attend_nodes(Matrix<double>{{1.0, 2.0}}, r);
  EXPECT_DOUBLE_EQ(e(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(e(0, 1), 2.0);
}

TEST(Attention, MatchesElementwiseFormula) {
  auto r = AttentionReadout<double>::init(3, 21);
  for (double& v : r.gate_b.value.data()) v = 0.3;
  for (double& v : r.trans_b.value.data()) v = -0.1;
  Matrix<double> h{{0.5, -1.0, 2.0}, {1.5, 0.25, -0.75}};
  auto e = attend_nodes(h, r);
  const auto g = ref::mul(ref::dense(h), ref::dense(r.gate_w.value));
  const auto t = ref::mul(ref::dense(h), ref::dense(r.trans_w.value));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(e(i, j), ref::logistic(g[i][j] + 0.3) * ref::relu(t[i][j] - 0.1), 1e-14);
}

TEST(Attention, IdenticalRowsIdenticalOutput) {
  auto r = AttentionReadout<double>::init(4, 2);
  Matrix<double> h{{0.1, 0.2, -0.3, 0.4}, {0.1, 0.2, -0.3, 0.4}};
  auto e = attend_nodes(h, r);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(e(0, j), e(1, j));
}

TEST(Attention, WidthMismatch) {
  auto r = AttentionReadout<double>::init(3, 1);
  EXPECT_EQ(error_kind([&] { attend_nodes(Matrix<double>(1, 2), r); }), ErrorKind::ShapeError);
  EXPECT_EQ(error_kind([] { AttentionReadout<double>::init(0, 1); }), ErrorKind::InvalidDimension);
}

TEST(Pool, SingleNodeUnitedIsSquare) {
  auto g = pool(Matrix<double>{{1.5, -2.0, 0.0}}, PoolMode::United);
  EXPECT_EQ(g.values, (std::vector<double>{2.25, 4.0, 0.0}));
  EXPECT_EQ(g.n_nodes, 1u);
  EXPECT_FALSE(g.pe_applied);
}

TEST(Pool, TwoRowHandReduction) {
  Matrix<double> e{{1, 0}, {0, 1}};
  EXPECT_EQ(pool(e, PoolMode::Sum).values, (std::vector<double>{1, 1}));
  EXPECT_EQ(pool(e, PoolMode::Max).values, (std::vector<double>{1, 1}));
  EXPECT_EQ(pool(e, PoolMode::Mean).values, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(pool(e, PoolMode::United).values, (std::vector<double>{1, 1}));
}

TEST(Pool, MaxWithNegatives) {
  EXPECT_EQ(pool(Matrix<double>{{-3, 2}, {-1, -5}}, PoolMode::Max).values, (std::vector<double>{-1, 2}));
}

TEST(Pool, EmptyIsEmptyGraph) {
  EXPECT_EQ(error_kind([] { pool(Matrix<double>(0, 3), PoolMode::Sum); }), ErrorKind::EmptyGraph);
}

TEST(Pool, IdentitiesOnRandomMatrices) {
  const CheckResult r = pooling_identities(100, 55);
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_EQ(r.trials, 100u);
}

TEST(Pool, ModeTags) {
  EXPECT_EQ(parse_pool_mode("united"), PoolMode::United);
  EXPECT_EQ(parse_pool_mode("mean"), PoolMode::Mean);
  EXPECT_THROW(parse_pool_mode("avg"), Error);
  EXPECT_EQ(parse_pe_mode("post-pool"), PeMode::PostPool);
  EXPECT_EQ(parse_pe_mode("per-node"), PeMode::PerNode);
  EXPECT_EQ(parse_pe_mode("off"), PeMode::Off);
  EXPECT_THROW(parse_pe_mode("learned"), Error);
}

TEST(Positional, FirstEntriesAndOffMode) {
  const PeReport rep = positional_checks();
  EXPECT_TRUE(rep.result.pass) << rep.result.detail;
  EXPECT_EQ(rep.p0, 0.0);
  EXPECT_NEAR(rep.p1, 0.540302305868, 1e-12);
}

TEST(Positional, OffsetFormula) {
  PositionalEncoder enc{10000.0, 6, PeMode::PostPool};
  const auto p = enc.post_pool_offset();
  EXPECT_DOUBLE_EQ(p[2], std::sin(2.0 / std::pow(10000.0, 2.0 / 6)));
  EXPECT_DOUBLE_EQ(p[3], std::cos(3.0 / std::pow(10000.0, 2.0 / 6)));
  EXPECT_DOUBLE_EQ(p[5], std::cos(5.0 / std::pow(10000.0, 4.0 / 6)));
}

TEST(Positional, AdditiveConstant) {
  PositionalEncoder enc{10000.0, 4, PeMode::PostPool};
  GraphVector<double> a{{1, 2, 3, 4}, 2, false}, b{{-5, 0.5, 0, 9}, 7, false};
  auto pa = positional_encode(a, enc), pb = positional_encode(b, enc);
  // same offset vector added to both, rounding included
  const auto p = enc.post_pool_offset();
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(pa.values[j], a.values[j] + p[j]);
    EXPECT_EQ(pb.values[j], b.values[j] + p[j]);
  }
}

TEST(Positional, TwiceIsContractViolation) {
  PositionalEncoder enc{10000.0, 2, PeMode::PostPool};
  auto once = positional_encode(GraphVector<double>{{0, 0}, 1, false}, enc);
  EXPECT_EQ(error_kind([&] { positional_encode(once, enc); }), ErrorKind::ContractViolation);
}

TEST(Positional, WidthMismatch) {
  EXPECT_EQ(error_kind([] { positional_encode(GraphVector<double>{{0, 0, 0}, 1, false}, {10000.0, 4, PeMode::PostPool}); }),
            ErrorKind::ShapeError);
}

TEST(Positional, PerNodeIsNoOpAfterPooling) {
  GraphVector<double> g{{1, 2}, 1, false};
  auto out = positional_encode(g, PositionalEncoder{10000.0, 2, PeMode::PerNode});
  EXPECT_EQ(out.values, g.values);
  EXPECT_FALSE(out.pe_applied);
}

TEST(Positional, NodeRowsFollowStandardTable) {
  PositionalEncoder enc{10000.0, 4, PeMode::PerNode};
  auto m = enc.node_rows(3);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(m(2, 0), std::sin(2.0));
  EXPECT_DOUBLE_EQ(m(2, 3), std::cos(2.0 / 100.0));
}

TEST(Positional, PerNodeBreaksPermutationInvariance) {
  // two nodes with different features, no edges; swapping their order only
  // matters once node rows carry position
  PositionalEncoder enc{10000.0, 2, PeMode::PerNode};
  auto r = AttentionReadout<double>::init(2, 9);
  Matrix<double> x{{0.2, 0.9}, {0.7, -0.4}}, swapped{{0.7, -0.4}, {0.2, 0.9}};
  const Matrix<double> pe = enc.node_rows(2);
  auto with_pe = [&](Matrix<double> m) {
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] += pe.data()[i];
    return m;
  };
  auto adj = normalize_adjacency(2, {}, AdjacencyMode::Symmetric);
  auto stack = GcnStack<double>::init({2, 2}, 4);
  auto run = [&](const Matrix<double>& m) { return pool(attend_nodes(gcn_forward(m, adj, stack), r), PoolMode::United).values; };
  EXPECT_EQ(run(x), run(swapped));
  EXPECT_NE(run(with_pe(x)), run(with_pe(swapped)));
}
