#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "reference.hpp"

using namespace dfept;
using namespace dfept::testing;

namespace {

Parameter<double> random_param(const std::string& name, std::size_t r, std::size_t c, Rng& rng) {
  return {name, ref::matrix<double>(ref::random_dense(rng, r, c))};
}

/// Reduce any matrix to a scalar through fixed random weights so every entry matters.
Var<double> weighted_sum(Var<double> v, std::uint64_t seed) {
  Rng rng(seed);
  Matrix<double> w = ref::matrix<double>(ref::random_dense(rng, v.rows(), v.cols()));
  return ad::sum_all(ad::hadamard(v, v.tape->constant(w)));
}

void expect_gradients(std::vector<Parameter<double>*> params, const LossFn& f) {
  const GradReport r = check_gradients(params, f);
  EXPECT_GT(r.checked, 0u);
  EXPECT_LE(r.worst_error, 1e-6) << r.worst_param << "[" << r.worst_index << "] analytic " << r.analytic
                                 << " numeric " << r.numeric;
}

}  // namespace

TEST(Backward, SumOfMatrixVectorProduct) {
  Parameter<double> w{"w", Matrix<double>{{1, 2, 3}, {4, 5, 6}}};
  const Matrix<double> x{{0.5}, {-1.0}, {2.0}};
  Tape<double> t;
  Var<double> loss = ad::sum_all(ad::matmul(t.parameter(w), t.constant(x)));
  t.backward(loss);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(w.grad(i, j), x(j, 0));
  expect_gradients({&w}, [&](bool bw) {
    Tape<double> tp;
    Var<double> l = ad::sum_all(ad::matmul(tp.parameter(w), tp.constant(x)));
    if (bw) tp.backward(l);
    return l.value()(0, 0);
  });
}

TEST(Backward, UnusedParameterHasZeroGradient) {
  Parameter<double> used{"u", Matrix<double>{{1.0, 2.0}}}, unused{"n", Matrix<double>{{3.0}}};
  Tape<double> t;
  t.parameter(unused);
  t.backward(ad::sum_all(t.parameter(used)));
  EXPECT_EQ(unused.grad, Matrix<double>(1, 1));
  EXPECT_EQ(used.grad, Matrix<double>({{1.0, 1.0}}));
}

TEST(Backward, RectifierPassesPositiveAdjoint) {
  Parameter<double> p{"p", Matrix<double>{{2.5, -1.0}}};
  Tape<double> t;
  Var<double> y = ad::relu(t.parameter(p));
  Var<double> loss = ad::sum_all(ad::hadamard(y, t.constant(Matrix<double>{{3.0, 7.0}})));
  t.backward(loss);
  EXPECT_EQ(p.grad(0, 0), 3.0);
  EXPECT_EQ(p.grad(0, 1), 0.0);
}

TEST(Backward, NonScalarLossIsContractViolation) {
  Parameter<double> p{"p", Matrix<double>{{1.0, 2.0}}};
  Tape<double> t;
  Var<double> v = t.parameter(p);
  try {
    t.backward(v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ContractViolation);
  }
}

TEST(Backward, GradientsAccumulateAcrossTapes) {
  Parameter<double> p{"p", Matrix<double>{{1.0}}};
  for (int k = 0; k < 3; ++k) {
    Tape<double> t;
    t.backward(ad::sum_all(ad::affine(t.parameter(p), 2.0, 0.0)));
  }
  EXPECT_EQ(p.grad(0, 0), 6.0);
  p.zero_grad();
  EXPECT_EQ(p.grad(0, 0), 0.0);
}

TEST(Backward, FrozenParameterGetsNoGradient) {
  Parameter<double> p{"p", Matrix<double>{{1.0}}};
  Tape<double> t;
  t.backward(ad::sum_all(t.parameter(p, false)));
  EXPECT_EQ(p.grad(0, 0), 0.0);
}

TEST(Replay, ReproducesRecordedValuesBitwise) {
  Rng rng(3);
  Parameter<double> a = random_param("a", 3, 4, rng), b = random_param("b", 4, 2, rng);
  Tape<double> t;
  Var<double> h = ad::sigmoid(ad::matmul(ad::relu(t.parameter(a)), t.parameter(b)));
  Var<double> loss = ad::softmax_cross_entropy(ad::max_rows(h), 1);
  std::vector<Matrix<double>> before;
  for (std::size_t i = 0; i < t.size(); ++i) before.push_back(t.value(i));
  t.replay();
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t.value(i), before[i]) << "node " << i;
  (void)loss;
}

TEST(Replay, PicksUpChangedLeaves) {
  Parameter<double> p{"p", Matrix<double>{{1.0, 2.0}}};
  Tape<double> t;
  Var<double> leaf = t.parameter(p);
  Var<double> s = ad::sum_all(leaf);
  t.value_mut(leaf)(0, 0) = 10.0;
  t.replay();
  EXPECT_EQ(s.value()(0, 0), 12.0);
}

// Every primitive against central differences.

TEST(Primitives, MatmulAddAffine) {
  Rng rng(10);
  auto a = random_param("a", 3, 2, rng), b = random_param("b", 2, 4, rng), c = random_param("c", 3, 4, rng);
  expect_gradients({&a, &b, &c}, [&](bool bw) {
    Tape<double> t;
    Var<double> y = ad::affine(ad::add(ad::matmul(t.parameter(a), t.parameter(b)), t.parameter(c)), -1.5, 0.25);
    Var<double> l = weighted_sum(y, 1);
    if (bw) t.backward(l);
    return l.value()(0, 0);
  });
}

TEST(Primitives, AddRowHadamard) {
  Rng rng(11);
  auto a = random_param("a", 4, 3, rng), r = random_param("r", 1, 3, rng), b = random_param("b", 4, 3, rng);
  expect_gradients({&a, &r, &b}, [&](bool bw) {
    Tape<double> t;
    Var<double> y = ad::hadamard(ad::add_row(t.parameter(a), t.parameter(r)), t.parameter(b));
    Var<double> l = weighted_sum(y, 2);
    if (bw) t.backward(l);
    return l.value()(0, 0);
  });
}

TEST(Primitives, ReluSigmoid) {
  Rng rng(12);
  auto a = random_param("a", 3, 3, rng);
  expect_gradients({&a}, [&](bool bw) {
    Tape<double> t;
    Var<double> x = t.parameter(a);
    Var<double> l = weighted_sum(ad::add(ad::relu(x), ad::sigmoid(ad::affine(x, 3.0, 0.0))), 3);
    if (bw) t.backward(l);
    return l.value()(0, 0);
  });
}

TEST(Primitives, RowReductions) {
  Rng rng(13);
  auto a = random_param("a", 5, 3, rng);
  expect_gradients({&a}, [&](bool bw) {
    Tape<double> t;
    Var<double> x = t.parameter(a);
    Var<double> y = ad::concat_cols(ad::concat_cols(ad::sum_rows(x), ad::mean_rows(x)), ad::max_rows(x));
    Var<double> l = weighted_sum(y, 4);
    if (bw) t.backward(l);
    return l.value()(0, 0);
  });
}

TEST(Primitives, MaxRowsRoutesToArgmax) {
  Parameter<double> p{"p", Matrix<double>{{1.0, 5.0}, {3.0, 2.0}}};
  Tape<double> t;
  t.backward(ad::sum_all(ad::max_rows(t.parameter(p))));
  EXPECT_EQ(p.grad, Matrix<double>({{0.0, 1.0}, {1.0, 0.0}}));
}

TEST(Primitives, PropagateAndGather) {
  Rng rng(14);
  auto table = random_param("table", 5, 3, rng);
  auto adj = normalize_adjacency(4, {{0, 1}, {1, 2}, {3, 1}}, AdjacencyMode::DirectedRow).as_sparse<double>();
  for (auto pooling : {ad::SubtokenPooling::Mean, ad::SubtokenPooling::Sum, ad::SubtokenPooling::First}) {
    expect_gradients({&table}, [&](bool bw) {
      Tape<double> t;
      Var<double> x = ad::gather(t.parameter(table), {{0}, {1, 2}, {4, 4, 3}, {2, 0}}, pooling);
      Var<double> l = weighted_sum(ad::propagate(adj, x), 5);
      if (bw) t.backward(l);
      return l.value()(0, 0);
    });
  }
}

TEST(Primitives, GatherErrors) {
  Parameter<double> table{"t", Matrix<double>(3, 2)};
  Tape<double> t;
  Var<double> v = t.parameter(table);
  EXPECT_THROW(ad::gather(v, {{}}, ad::SubtokenPooling::Mean), Error);
  EXPECT_THROW(ad::gather(v, {{3}}, ad::SubtokenPooling::Mean), Error);
}

TEST(Primitives, SoftmaxCrossEntropy) {
  Rng rng(15);
  auto z = random_param("z", 1, 2, rng);
  for (std::size_t label : {0u, 1u})
    expect_gradients({&z}, [&](bool bw) {
      Tape<double> t;
      Var<double> l = ad::softmax_cross_entropy(t.parameter(z), label, 0.7);
      if (bw) t.backward(l);
      return l.value()(0, 0);
    });
}

TEST(Primitives, CrossEntropyValue) {
  Tape<double> t;
  Var<double> l = ad::softmax_cross_entropy(t.constant(Matrix<double>{{0.0, 0.0}}), 1);
  EXPECT_NEAR(l.value()(0, 0), std::log(2.0), 1e-15);
  Var<double> big = ad::softmax_cross_entropy(t.constant(Matrix<double>{{1000.0, 0.0}}), 0);
  EXPECT_NEAR(big.value()(0, 0), 0.0, 1e-12);
  EXPECT_THROW(ad::softmax_cross_entropy(t.constant(Matrix<double>{{0.0, 0.0}}), 2), Error);
}

TEST(Primitives, ShapeErrors) {
  Tape<double> t;
  Var<double> a = t.constant(Matrix<double>(2, 3)), b = t.constant(Matrix<double>(2, 2));
  EXPECT_THROW(ad::matmul(a, b), Error);
  EXPECT_THROW(ad::add(a, b), Error);
  EXPECT_THROW(ad::hadamard(a, b), Error);
  EXPECT_THROW(ad::concat_cols(a, t.constant(Matrix<double>(3, 1))), Error);
}
