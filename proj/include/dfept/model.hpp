#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dfept/embed.hpp"
#include "dfept/fusion.hpp"
#include "dfept/gnn.hpp"
#include "dfept/readout.hpp"

namespace dfept {

enum class GnnKind { Gcn, Ggnn };

std::string_view to_string(GnnKind kind);
GnnKind parse_gnn_kind(std::string_view tag);

struct ModelConfig {
  GnnKind gnn = GnnKind::Gcn;
  /// GCN layers or GGNN steps.
  std::size_t depth = 2;
  PoolMode pool = PoolMode::United;
  PeMode pe = PeMode::PostPool;
  AdjacencyMode adjacency = AdjacencyMode::Symmetric;
  /// Node feature width; follows the embedding table.
  std::size_t dim = 128;
  std::size_t seq_dim = 0;
  /// Classifier hidden width; 0 means (dim + seq_dim) / 2.
  std::size_t hidden = 0;
  bool gcn_bias = false;
  SubtokenPooling subtoken_pooling = SubtokenPooling::Mean;
  bool train_graph_branch = true;
  bool train_embeddings = false;
  std::uint64_t seed = 0;
  /// Graphs were extracted with loop back-edges.
  bool back_edges = false;

  std::size_t resolved_hidden() const { return hidden ? hidden : std::max<std::size_t>(1, (dim + seq_dim) / 2); }

  nlohmann::ordered_json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// One function ready for the network: token ids per node, propagation operator and sequence vector.
struct GraphSample {
  std::string id;
  int label = 0;
  std::size_t n_nodes = 0;
  std::vector<std::vector<std::size_t>> token_ids;
  NormalizedAdjacency adjacency;
  std::vector<float> sequence;
};

GraphSample make_sample(const DataFlowGraph& dfg, const EmbeddingTable& table, AdjacencyMode mode,
                        std::vector<float> sequence, int label);

/// Embedding -> GNN -> attention readout -> pooling -> positional encoding -> fusion classifier.
template <class T>
struct DfeptModel {
  ModelConfig config;
  TypeVocabulary vocab;
  TokenizerMode tokenizer = TokenizerMode::WhitespaceStar;
  Parameter<T> embedding;
  GcnStack<T> gcn;
  GgnnCell<T> ggnn;
  AttentionReadout<T> readout;
  FusionModel<T> fusion;

  static DfeptModel create(ModelConfig cfg, const EmbeddingTable& table) {
    table.validate();
    cfg.dim = table.dim();
    if (cfg.seq_dim == 0) throw Error(ErrorKind::InvalidDimension, "sequence embedding width must be positive");
    if (cfg.depth == 0) throw Error(ErrorKind::InvalidDimension, "GNN depth must be at least 1");
    DfeptModel m;
    m.config = cfg;
    m.vocab = table.vocab;
    m.tokenizer = table.tokenizer;
    m.embedding = {"embedding", table.matrix.cast<T>()};
    if (cfg.gnn == GnnKind::Gcn)
      m.gcn = GcnStack<T>::init(std::vector<std::size_t>(cfg.depth + 1, cfg.dim), derive_seed(cfg.seed, "gcn"),
                                cfg.gcn_bias);
    else
      m.ggnn = GgnnCell<T>::init(cfg.dim, cfg.depth, derive_seed(cfg.seed, "ggnn"));
    m.readout = AttentionReadout<T>::init(cfg.dim, derive_seed(cfg.seed, "readout"));
    m.fusion = FusionModel<T>::init(cfg.dim + cfg.seq_dim, cfg.resolved_hidden(), derive_seed(cfg.seed, "fusion"));
    return m;
  }

  /// Every parameter in checkpoint order.
  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out{&embedding};
    if (config.gnn == GnnKind::Gcn) {
      for (auto& w : gcn.weights) out.push_back(&w);
      for (auto& b : gcn.biases) out.push_back(&b);
    } else {
      for (auto* p : {&ggnn.w_update, &ggnn.u_update, &ggnn.w_reset, &ggnn.u_reset, &ggnn.w_out, &ggnn.u_out})
        out.push_back(p);
    }
    for (auto* p : {&readout.gate_w, &readout.gate_b, &readout.trans_w, &readout.trans_b}) out.push_back(p);
    for (auto* p : {&fusion.w1, &fusion.b1, &fusion.w2, &fusion.b2}) out.push_back(p);
    return out;
  }

  /// Parameters that receive gradient updates under the current config.
  std::vector<Parameter<T>*> trainable_parameters() {
    std::vector<Parameter<T>*> out;
    for (Parameter<T>* p : parameters()) {
      if (p == &embedding) {
        if (config.train_embeddings) out.push_back(p);
      } else if (p->name.rfind("fusion.", 0) == 0 || config.train_graph_branch) {
        out.push_back(p);
      }
    }
    return out;
  }

  void zero_grad() {
    for (Parameter<T>* p : parameters()) p->zero_grad();
  }

  /// Pooled and encoded graph vector, 1 x dim.
  Var<T> graph_vector(Tape<T>& t, const GraphSample& s) {
    const std::size_t d = config.dim;
    const bool graph_trainable = config.train_graph_branch;
    const PositionalEncoder enc{10000.0, d, config.pe};
    Var<T> g;
    if (s.n_nodes == 0) {
      g = t.constant(Matrix<T>(1, d));
    } else {
      if (s.token_ids.size() != s.n_nodes || s.adjacency.n != s.n_nodes)
        throw Error(ErrorKind::ShapeError, "sample '" + s.id + "' is inconsistent with its node count");
      Var<T> table = t.parameter(embedding, config.train_embeddings);
      Var<T> x = ad::gather(table, s.token_ids, config.subtoken_pooling);
      if (config.pe == PeMode::PerNode) x = ad::add(x, t.constant(enc.node_rows(s.n_nodes).cast<T>()));
      Var<T> h = config.gnn == GnnKind::Gcn ? gcn_forward(x, s.adjacency, gcn, graph_trainable)
                                            : ggnn_forward(x, s.adjacency, ggnn, graph_trainable);
      g = pool(attend_nodes(h, readout, graph_trainable), config.pool);
    }
    if (config.pe == PeMode::PostPool) {
      std::vector<T> offset;
      for (double v : enc.post_pool_offset()) offset.push_back(static_cast<T>(v));
      g = ad::add(g, t.constant(Matrix<T>::row_vector(std::move(offset))));
    }
    return g;
  }

  /// 1 x 2 class scores.
  Var<T> logits(Tape<T>& t, const GraphSample& s) {
    if (s.sequence.size() != config.seq_dim)
      throw Error(ErrorKind::ShapeError, "sample '" + s.id + "' has sequence width " +
                                             std::to_string(s.sequence.size()) + ", model expects " +
                                             std::to_string(config.seq_dim));
    Var<T> g = graph_vector(t, s);
    std::vector<T> seq(s.sequence.begin(), s.sequence.end());
    Var<T> fused = ad::concat_cols(g, t.constant(Matrix<T>::row_vector(std::move(seq))));
    return classifier_logits(fused, fusion, true);
  }

  Prediction<T> predict(const GraphSample& s) {
    Tape<T> t;
    Var<T> z = logits(t, s);
    Prediction<T> p;
    p.logits = {z.value()(0, 0), z.value()(0, 1)};
    p.probabilities = softmax2(p.logits);
    p.label = predicted_label(p.probabilities);
    return p;
  }

  template <class U>
  DfeptModel<U> cast() const {
    DfeptModel<U> m;
    m.config = config;
    m.vocab = vocab;
    m.tokenizer = tokenizer;
    auto conv = [](const Parameter<T>& p) { return Parameter<U>(p.name, p.value.template cast<U>()); };
    m.embedding = conv(embedding);
    for (const auto& w : gcn.weights) m.gcn.weights.push_back(conv(w));
    for (const auto& b : gcn.biases) m.gcn.biases.push_back(conv(b));
    m.ggnn.w_update = conv(ggnn.w_update);
    m.ggnn.u_update = conv(ggnn.u_update);
    m.ggnn.w_reset = conv(ggnn.w_reset);
    m.ggnn.u_reset = conv(ggnn.u_reset);
    m.ggnn.w_out = conv(ggnn.w_out);
    m.ggnn.u_out = conv(ggnn.u_out);
    m.ggnn.steps = ggnn.steps;
    m.readout.gate_w = conv(readout.gate_w);
    m.readout.gate_b = conv(readout.gate_b);
    m.readout.trans_w = conv(readout.trans_w);
    m.readout.trans_b = conv(readout.trans_b);
    m.fusion.w1 = conv(fusion.w1);
    m.fusion.b1 = conv(fusion.b1);
    m.fusion.w2 = conv(fusion.w2);
    m.fusion.b2 = conv(fusion.b2);
    return m;
  }
};

using Model = DfeptModel<float>;

/// Binary container: magic "DFEPTCKPT1", u32 version, u32-length config JSON,
/// u32 tensor count, then per tensor u32-length name, u32 rows, u32 cols and
/// little-endian float32 data.
void save_checkpoint(Model& model, const std::filesystem::path& path);
std::string checkpoint_bytes(Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace dfept
