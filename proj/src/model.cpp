#include "dfept/model.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"

namespace dfept {
namespace {

constexpr std::string_view kCheckpointMagic = "DFEPTCKPT1";
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

std::string_view to_string(GnnKind kind) { return kind == GnnKind::Gcn ? "gcn" : "ggnn"; }

GnnKind parse_gnn_kind(std::string_view tag) {
  if (tag == "gcn") return GnnKind::Gcn;
  if (tag == "ggnn") return GnnKind::Ggnn;
  throw Error(ErrorKind::UnsupportedFormat, "unknown gnn '" + std::string(tag) + "'");
}

nlohmann::ordered_json ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["gnn"] = to_string(gnn);
  j["depth"] = depth;
  j["pool"] = to_string(pool);
  j["pe"] = to_string(pe);
  j["adjacency"] = to_string(adjacency);
  j["dim"] = dim;
  j["seq_dim"] = seq_dim;
  j["hidden"] = resolved_hidden();
  j["gcn_bias"] = gcn_bias;
  j["subtoken_pooling"] = to_string(subtoken_pooling);
  j["train_graph_branch"] = train_graph_branch;
  j["train_embeddings"] = train_embeddings;
  j["seed"] = seed;
  j["back_edges"] = back_edges;
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.gnn = parse_gnn_kind(j.at("gnn").get<std::string>());
    c.depth = j.at("depth").get<std::size_t>();
    c.pool = parse_pool_mode(j.at("pool").get<std::string>());
    c.pe = parse_pe_mode(j.at("pe").get<std::string>());
    c.adjacency = parse_adjacency_mode(j.at("adjacency").get<std::string>());
    c.dim = j.at("dim").get<std::size_t>();
    c.seq_dim = j.at("seq_dim").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.gcn_bias = j.at("gcn_bias").get<bool>();
    c.subtoken_pooling = parse_subtoken_pooling(j.at("subtoken_pooling").get<std::string>());
    c.train_graph_branch = j.at("train_graph_branch").get<bool>();
    c.train_embeddings = j.at("train_embeddings").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.back_edges = j.value("back_edges", false);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
}

GraphSample make_sample(const DataFlowGraph& dfg, const EmbeddingTable& table, AdjacencyMode mode,
                        std::vector<float> sequence, int label) {
  GraphSample s;
  s.id = dfg.function_id;
  s.label = label;
  s.n_nodes = dfg.size();
  s.token_ids = node_token_ids(dfg, table);
  if (!dfg.empty()) s.adjacency = normalize_adjacency(dfg, mode);
  s.sequence = std::move(sequence);
  return s;
}

std::string checkpoint_bytes(Model& model) {
  std::ostringstream out(std::ios::binary);
  io::write_bytes(out, std::string(kCheckpointMagic));
  io::write_u32(out, kCheckpointVersion);
  nlohmann::ordered_json meta;
  meta["config"] = model.config.to_json();
  meta["vocab"] = model.vocab.tokens();
  meta["tokenizer"] = model.tokenizer == TokenizerMode::LongestMatch ? "longest-match" : "whitespace-star";
  const std::string config = meta.dump();
  io::write_u32(out, static_cast<std::uint32_t>(config.size()));
  io::write_bytes(out, config);
  auto params = model.parameters();
  io::write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (Parameter<float>* p : params) {
    io::write_u32(out, static_cast<std::uint32_t>(p->name.size()));
    io::write_bytes(out, p->name);
    io::write_u32(out, static_cast<std::uint32_t>(p->value.rows()));
    io::write_u32(out, static_cast<std::uint32_t>(p->value.cols()));
    for (float v : p->value.data()) io::write_f32(out, v);
  }
  return out.str();
}

void save_checkpoint(Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write checkpoint " + path.string());
  const std::string bytes = checkpoint_bytes(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open checkpoint " + path.string());
  if (io::read_bytes(in, kCheckpointMagic.size()) != kCheckpointMagic) throw FormatError("not a checkpoint file");
  if (const auto v = io::read_u32(in); v != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(v));
  const std::string config = io::read_bytes(in, io::read_u32(in));
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(config);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }

  std::map<std::string, Matrix<float>> tensors;
  const std::uint32_t count = io::read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = io::read_bytes(in, io::read_u32(in));
    const std::uint32_t rows = io::read_u32(in), cols = io::read_u32(in);
    Matrix<float> m(rows, cols);
    for (float& v : m.data()) v = io::read_f32(in);
    tensors.emplace(std::move(name), std::move(m));
  }

  EmbeddingTable table;
  try {
    table.vocab = TypeVocabulary(meta.at("vocab").get<std::vector<std::string>>());
    table.tokenizer =
        meta.value("tokenizer", "whitespace-star") == "longest-match" ? TokenizerMode::LongestMatch : TokenizerMode::WhitespaceStar;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint vocabulary: ") + e.what());
  }
  auto emb = tensors.find("embedding");
  if (emb == tensors.end()) throw FormatError("checkpoint has no embedding tensor");
  table.matrix = emb->second;

  Model model = Model::create(ModelConfig::from_json(meta.at("config")), table);
  for (Parameter<float>* p : model.parameters()) {
    auto it = tensors.find(p->name);
    if (it == tensors.end()) throw FormatError("checkpoint is missing tensor '" + p->name + "'");
    require_shape(it->second, p->value.rows(), p->value.cols(), p->name.c_str());
    p->value = it->second;
    p->zero_grad();
  }
  return model;
}

}  // namespace dfept
