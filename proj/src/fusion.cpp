#include "dfept/fusion.hpp"

#include <fstream>

#include <json.hpp>

namespace dfept {

SequencePolicy parse_sequence_policy(const std::string& spec, std::size_t default_dim) {
  SequencePolicy p;
  p.dim = default_dim;
  if (spec == "zero") {
    p.kind = SequencePolicy::Kind::Zero;
  } else if (spec.rfind("random:", 0) == 0) {
    p.kind = SequencePolicy::Kind::Random;
    try {
      std::size_t used = 0;
      p.seed = std::stoull(spec.substr(7), &used);
      if (used != spec.size() - 7) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorKind::UnsupportedFormat, "bad random sequence policy '" + spec + "'");
    }
  } else {
    p.kind = SequencePolicy::Kind::File;
    p.path = spec;
    p.dim = 0;
  }
  return p;
}

std::map<std::string, SequenceEmbedding> load_sequence_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open sequence embeddings " + path.string());
  std::map<std::string, SequenceEmbedding> out;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SequenceEmbedding e;
    try {
      auto j = nlohmann::json::parse(line);
      const auto& id = j.at("id");
      e.function_id = id.is_string() ? id.get<std::string>() : id.dump();
      e.vector = j.at("vector").get<std::vector<float>>();
      e.source = j.value("source", path.filename().string());
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(ex.what(), lineno);
    }
    if (e.vector.empty()) throw FormatError("empty vector", lineno);
    if (width == 0) width = e.vector.size();
    if (e.vector.size() != width)
      throw Error(ErrorKind::ShapeError, "line " + std::to_string(lineno) + ": vector width " +
                                             std::to_string(e.vector.size()) + " differs from " + std::to_string(width));
    for (float v : e.vector)
      if (!std::isfinite(v)) throw Error(ErrorKind::DataError, "line " + std::to_string(lineno) + ": non-finite entry");
    auto key = e.function_id;
    out.insert_or_assign(std::move(key), std::move(e));
  }
  return out;
}

std::vector<SequenceEmbedding> resolve_sequence_embeddings(const SequencePolicy& policy,
                                                           const std::vector<std::string>& ids) {
  std::vector<SequenceEmbedding> out;
  out.reserve(ids.size());
  if (policy.kind == SequencePolicy::Kind::File) {
    auto table = load_sequence_embeddings(policy.path);
    for (const auto& id : ids) {
      auto it = table.find(id);
      if (it == table.end()) throw Error(ErrorKind::DataError, "no sequence embedding for sample '" + id + "'");
      out.push_back(it->second);
    }
    return out;
  }
  if (policy.dim == 0) throw Error(ErrorKind::InvalidDimension, "sequence embedding width must be positive");
  for (const auto& id : ids) {
    SequenceEmbedding e{id, std::vector<float>(policy.dim, 0.0f), "zero"};
    if (policy.kind == SequencePolicy::Kind::Random) {
      // per-id stream so the vector does not depend on sample order
      Rng rng(derive_seed(policy.seed, id));
      for (float& v : e.vector) v = static_cast<float>(rng.uniform(-1.0, 1.0));
      e.source = "random";
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace dfept
