#include "dfept/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dfept/rng.hpp"

namespace dfept {

void Corpus::validate() const {
  std::set<std::string> ids;
  for (const auto& s : samples) {
    if (!ids.insert(s.id).second) throw Error(ErrorKind::DataError, "duplicate sample id '" + s.id + "'");
    if (!s.label || (*s.label != 0 && *s.label != 1))
      throw Error(ErrorKind::DataError, "sample '" + s.id + "' has no binary label");
  }
}

Corpus parse_jsonl(std::istream& in, std::string name) {
  Corpus corpus;
  corpus.name = std::move(name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(e.what(), lineno);
    }
    if (!j.is_object()) throw FormatError("expected a JSON object", lineno);
    if (!j.contains("func") || !j["func"].is_string()) throw FormatError("missing string field \"func\"", lineno);
    if (!j.contains("target")) throw FormatError("missing field \"target\"", lineno);
    const auto& target = j["target"];
    if (!target.is_number_integer() && !target.is_boolean())
      throw FormatError("field \"target\" is not an integer", lineno);
    const long long label = target.is_boolean() ? target.get<bool>() : target.get<long long>();
    if (label != 0 && label != 1)
      throw Error(ErrorKind::DataError, "line " + std::to_string(lineno) + ": target " + std::to_string(label) +
                                            " is not 0 or 1");
    SourceFunction s;
    if (j.contains("idx")) {
      const auto& idx = j["idx"];
      if (idx.is_string())
        s.id = idx.get<std::string>();
      else if (idx.is_number_integer())
        s.id = std::to_string(idx.get<long long>());
      else
        throw FormatError("field \"idx\" must be a string or integer", lineno);
    } else {
      s.id = std::to_string(lineno - 1);
    }
    s.code = j["func"].get<std::string>();
    s.label = static_cast<int>(label);
    corpus.samples.push_back(std::move(s));
  }
  corpus.validate();
  return corpus;
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open dataset " + path.string());
  return parse_jsonl(in, path.stem().string());
}

SplitSizes split_sizes(std::size_t n) {
  const std::size_t train = n * 8 / 10;
  const std::size_t rest = n - train;
  const std::size_t test = rest / 2;
  return {train, rest - test, test};
}

CorpusSplit split(const Corpus& corpus, const SplitSpec& spec) {
  const std::size_t n = corpus.size();
  if (n < 3) throw Error(ErrorKind::TooSmall, "need at least 3 samples to split, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (spec.strategy == SplitStrategy::Shuffled) {
    Rng rng(derive_seed(spec.seed, "split"));
    rng.shuffle(order);
  }
  const SplitSizes sizes = split_sizes(n);
  CorpusSplit out;
  for (Corpus* c : {&out.train, &out.valid, &out.test}) c->name = corpus.name;
  for (std::size_t k = 0; k < n; ++k) {
    Corpus& dst = k < sizes.train ? out.train : (k < sizes.train + sizes.valid ? out.valid : out.test);
    dst.samples.push_back(corpus.samples[order[k]]);
  }
  return out;
}

SplitManifest load_split_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open split manifest " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    auto ids = [&](const char* key) {
      std::vector<std::string> out;
      for (const auto& v : j.at(key)) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      return out;
    };
    return {ids("train"), ids("valid"), ids("test")};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("split manifest: " + std::string(e.what()));
  }
}

CorpusSplit apply_manifest(const Corpus& corpus, const SplitManifest& manifest) {
  std::map<std::string, const SourceFunction*> by_id;
  for (const auto& s : corpus.samples) by_id[s.id] = &s;
  std::set<std::string> used;
  auto pick = [&](const std::vector<std::string>& ids) {
    Corpus c;
    c.name = corpus.name;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorKind::DataError, "manifest id '" + id + "' is not in the corpus");
      if (!used.insert(id).second) throw Error(ErrorKind::DataError, "manifest id '" + id + "' appears twice");
      c.samples.push_back(*it->second);
    }
    return c;
  };
  CorpusSplit out;
  out.train = pick(manifest.train);
  out.valid = pick(manifest.valid);
  out.test = pick(manifest.test);
  return out;
}

MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw Error(ErrorKind::ContractViolation, "predictions and labels differ in length");
  if (predictions.empty()) throw Error(ErrorKind::ContractViolation, "no predictions to score");
  MetricsReport m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == 1, y = labels[i] == 1;
    if (p && y) ++m.tp;
    else if (!p && !y) ++m.tn;
    else if (p) ++m.fp;
    else ++m.fn;
  }
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  m.accuracy = d(m.tp + m.tn) / d(m.total());
  m.precision = m.tp + m.fp == 0 ? 0.0 : d(m.tp) / d(m.tp + m.fp);
  m.recall = m.tp + m.fn == 0 ? 0.0 : d(m.tp) / d(m.tp + m.fn);
  m.f1 = m.precision + m.recall == 0 ? 0.0 : 2 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

std::string metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["tp"] = m.tp;
  j["tn"] = m.tn;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  return j.dump();
}

std::string metrics_table(const MetricsReport& m) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(10) << "accuracy" << std::right << std::setw(8) << m.accuracy << '\n';
  out << std::left << std::setw(10) << "precision" << std::right << std::setw(8) << m.precision << '\n';
  out << std::left << std::setw(10) << "recall" << std::right << std::setw(8) << m.recall << '\n';
  out << std::left << std::setw(10) << "f1" << std::right << std::setw(8) << m.f1 << '\n';
  out << std::left << std::setw(10) << "TP/TN" << std::right << std::setw(8)
      << (std::to_string(m.tp) + "/" + std::to_string(m.tn)) << '\n';
  out << std::left << std::setw(10) << "FP/FN" << std::right << std::setw(8)
      << (std::to_string(m.fp) + "/" + std::to_string(m.fn)) << '\n';
  return out.str();
}

}  // namespace dfept
