#pragma once

#include <map>
#include <sstream>

#include "dfept/model.hpp"
#include "gradcheck.hpp"
#include "reference.hpp"

namespace dfept::testing {

/// Parameter class used in reports: "embedding", "gcn.w", "gcn.b", "ggnn", "att", "fusion.w1", ...
inline std::string parameter_class(const std::string& name) {
  if (name == "embedding") return name;
  if (name.rfind("gcn.w", 0) == 0) return "gcn.w";
  if (name.rfind("gcn.b", 0) == 0) return "gcn.b";
  if (name.rfind("ggnn.", 0) == 0) return name;
  if (name.rfind("att.", 0) == 0) return name;
  return name;  // fusion.w1 / b1 / w2 / b2
}

struct ModelGradReport {
  std::map<std::string, double> worst_by_class;
  double worst = 0;
  std::string worst_where;
  std::size_t checked = 0;
};

/// Random small model (n <= 6 nodes, d <= 4) in double precision with every
/// parameter trainable. Returns the sample alongside so callers can reuse it.
inline std::pair<DfeptModel<double>, GraphSample> random_model(GnnKind kind, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = 1 + rng.below(4);
  const std::size_t n = 1 + rng.below(6);
  std::vector<std::string> tokens{"int", "char", "*", "long"};
  EmbeddingTable table = init_random_table(tokens, d, rng.next());
  // spread the rows out so activations sit away from the rectifier kink
  for (float& v : table.matrix.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));

  ModelConfig cfg;
  cfg.gnn = kind;
  cfg.depth = 1 + rng.below(2);
  const PoolMode pools[] = {PoolMode::Sum, PoolMode::Max, PoolMode::Mean, PoolMode::United};
  cfg.pool = pools[rng.below(4)];
  const PeMode pes[] = {PeMode::PostPool, PeMode::PerNode, PeMode::Off};
  cfg.pe = pes[rng.below(3)];
  cfg.adjacency = rng.below(2) ? AdjacencyMode::DirectedRow : AdjacencyMode::Symmetric;
  cfg.seq_dim = 1 + rng.below(3);
  cfg.hidden = 2 + rng.below(3);
  cfg.gcn_bias = true;
  cfg.train_embeddings = true;
  cfg.seed = rng.next();
  DfeptModel<double> model = Model::create(cfg, table).cast<double>();
  // nonzero biases so every bias sees a generic point
  for (Parameter<double>* p : model.parameters())
    if (p->value.rows() == 1)
      for (double& v : p->value.data()) v = rng.uniform(-0.3, 0.3);

  ref::RandomGraph g = ref::random_graph(rng, n, n, 0.35);
  GraphSample s;
  s.id = "g" + std::to_string(seed);
  s.label = static_cast<int>(rng.below(2));
  s.n_nodes = n;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> ids;
    const std::size_t k = 1 + rng.below(3);
    for (std::size_t j = 0; j < k; ++j) ids.push_back(rng.below(table.vocab.size()));
    s.token_ids.push_back(ids);
  }
  s.adjacency = normalize_adjacency(n, std::vector<DfgEdge>(g.edges.begin(), g.edges.end()), cfg.adjacency);
  for (std::size_t j = 0; j < cfg.seq_dim; ++j) s.sequence.push_back(static_cast<float>(rng.uniform(-1.0, 1.0)));
  return {std::move(model), std::move(s)};
}

inline LossFn model_loss(DfeptModel<double>& m, const GraphSample& s) {
  return [&m, &s](bool run_backward) {
    Tape<double> t;
    Var<double> loss = ad::softmax_cross_entropy(m.logits(t, s), static_cast<std::size_t>(s.label));
    if (run_backward) t.backward(loss);
    return loss.value()(0, 0);
  };
}

/// Worst relative error per parameter class over `trials` random models of each kind.
inline ModelGradReport model_gradient_check(std::size_t trials, std::uint64_t seed, double eps = 1e-4) {
  ModelGradReport rep;
  for (GnnKind kind : {GnnKind::Gcn, GnnKind::Ggnn}) {
    for (std::size_t t = 0; t < trials; ++t) {
      auto [model, sample] = random_model(kind, derive_seed(seed, std::string(to_string(kind)) + std::to_string(t)));
      for (Parameter<double>* p : model.parameters()) {
        GradReport r = check_gradients({p}, model_loss(model, sample), eps);
        double& w = rep.worst_by_class[parameter_class(p->name)];
        w = std::max(w, r.worst_error);
        rep.checked += r.checked;
        if (r.worst_error >= rep.worst) {
          rep.worst = r.worst_error;
          std::ostringstream os;
          os << to_string(kind) << " trial " << t << " " << p->name << "[" << r.worst_index << "] analytic "
             << r.analytic << " numeric " << r.numeric;
          rep.worst_where = os.str();
        }
      }
    }
  }
  return rep;
}

}  // namespace dfept::testing
