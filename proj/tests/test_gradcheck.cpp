#include <gtest/gtest.h>

#include "model_gradcheck.hpp"

using namespace dfept;
using namespace dfept::testing;

TEST(ModelGradients, EveryParameterClassWithinTolerance) {
  const ModelGradReport rep = model_gradient_check(20, 2024);
  for (const auto& [cls, worst] : rep.worst_by_class) EXPECT_LE(worst, 1e-4) << cls;
  EXPECT_LE(rep.worst, 1e-4) << rep.worst_where;
  for (const char* cls : {"embedding", "gcn.w", "gcn.b", "ggnn.wz", "ggnn.uz", "ggnn.wr", "ggnn.ur", "ggnn.wo",
                          "ggnn.uo", "att.gate_w", "att.gate_b", "att.trans_w", "att.trans_b", "fusion.w1",
                          "fusion.b1", "fusion.w2", "fusion.b2"})
    EXPECT_EQ(rep.worst_by_class.count(cls), 1u) << cls << " never checked";
}

TEST(ModelGradients, GradientErrorDefinition) {
  EXPECT_EQ(gradient_error(1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(gradient_error(2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(gradient_error(0.0, 1e-9), 1e-3);
}

TEST(ModelGradients, FrozenBranchLeavesGraphGradientsZero) {
  auto [model, sample] = random_model(GnnKind::Gcn, 5);
  model.config.train_graph_branch = false;
  model.config.train_embeddings = false;
  model.zero_grad();
  model_loss(model, sample)(true);
  for (Parameter<double>* p : model.parameters()) {
    const bool fusion = p->name.rfind("fusion.", 0) == 0;
    double mag = 0;
    for (double g : p->grad.data()) mag += std::abs(g);
    if (!fusion) EXPECT_EQ(mag, 0.0) << p->name;
  }
  EXPECT_EQ(model.trainable_parameters().size(), 4u);
}
