#include "synthetic.hpp"

#include <array>
#include <fstream>

#include <json.hpp>

#include "dfept/dfg.hpp"
#include "dfept/embed.hpp"
#include "dfept/rng.hpp"

namespace dfept::testing {
namespace {

constexpr std::array kTypes{"char", "int", "unsigned char", "struct buf", "long"};
constexpr std::array kPtrNames{"p", "ptr", "buf", "str", "dst", "node", "cur", "data"};
constexpr std::array kSrcNames{"src", "in", "base", "arg", "from"};
constexpr std::array kIntNames{"n", "len", "size", "count", "k"};
constexpr std::array kCallees{"consume", "copy_out", "write_all", "process", "emit"};

template <class A>
std::string pick(Rng& rng, const A& a) {
  return a[rng.below(a.size())];
}

struct Names {
  std::string type, v, src, n, tmp, callee, fn;
};

// literal-free statement over the int parameter
std::string filler(Rng& rng, const Names& x) {
  switch (rng.below(4)) {
    case 0: return "int " + x.tmp + " = " + x.n + " * " + x.n + "; log_val(" + x.tmp + ");";
    case 1: return "int " + x.tmp + " = " + x.n + " + " + x.n + "; if (" + x.tmp + " > " + x.n + ") { log_val(" + x.n + "); }";
    case 2: return "log_val(" + x.n + ");";
    default: return "";
  }
}

std::string positive(Rng& rng, const Names& x) {
  const std::string t = x.type + " *";
  const std::string sig = "void " + x.fn + "(" + t + x.src + ", int " + x.n + ") { ";
  switch (rng.below(3)) {
    case 0:
      return sig + t + x.v + " = NULL; " + filler(rng, x) + " " + x.callee + "(" + x.v + ", " + x.src + "); }";
    case 1:
      return sig + t + x.v + "; " + filler(rng, x) + " " + x.v + " = NULL; " + x.callee + "(" + x.v + "); }";
    default:
      return sig + t + x.v + " = " + x.src + "; if (" + x.n + " > 4) { " + x.v + " = NULL; } " + filler(rng, x) + " " +
             x.callee + "(" + x.v + "); }";
  }
}

std::string negative(Rng& rng, const Names& x) {
  const std::string t = x.type + " *";
  const std::string sig = "void " + x.fn + "(" + t + x.src + ", int " + x.n + ") { ";
  switch (rng.below(4)) {
    case 0:
      return sig + t + x.v + " = " + x.src + "; " + filler(rng, x) + " " + x.callee + "(" + x.v + ", " + x.src + "); }";
    case 1:
      return sig + t + x.v + " = NULL; " + x.v + " = " + x.src + "; " + filler(rng, x) + " " + x.callee + "(" + x.v +
             "); }";
    case 2:
      return sig + t + x.v + " = NULL; " + filler(rng, x) + " " + x.callee + "(" + x.src + "); }";
    default:
      return sig + t + x.v + "; if (" + x.n + " > 4) { " + x.v + " = " + x.src + "; } else { " + x.v + " = " + x.src +
             "; } " + filler(rng, x) + " " + x.callee + "(" + x.v + "); }";
  }
}

}  // namespace

Corpus synthetic_corpus(std::size_t per_class, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "synthetic"));
  Corpus c;
  c.name = "synthetic";
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int label = static_cast<int>(i % 2);
    Names x;
    x.type = pick(rng, kTypes);
    x.v = pick(rng, kPtrNames);
    x.src = pick(rng, kSrcNames);
    x.n = pick(rng, kIntNames);
    x.tmp = "t" + std::to_string(rng.below(10));
    x.callee = pick(rng, kCallees);
    x.fn = "fn_" + std::to_string(i);
    SourceFunction s;
    s.id = "syn" + std::to_string(i);
    s.code = label ? positive(rng, x) : negative(rng, x);
    s.label = label;
    c.samples.push_back(std::move(s));
  }
  return c;
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  for (const auto& s : corpus.samples) {
    nlohmann::ordered_json j;
    j["idx"] = s.id;
    j["func"] = s.code;
    j["target"] = s.label.value_or(0);
    out << j.dump() << '\n';
  }
}

PreparedCorpus prepare(const Corpus& corpus, std::size_t dim, std::size_t seq_dim, AdjacencyMode mode,
                       std::uint64_t seed) {
  std::vector<DataFlowGraph> graphs;
  for (const SourceFunction& f : corpus.samples) graphs.push_back(extract_dfg(f));
  PreparedCorpus out{init_random_table(collect_type_tokens(graphs), dim, seed), {}};
  for (std::size_t i = 0; i < graphs.size(); ++i)
    out.samples.push_back(
        make_sample(graphs[i], out.table, mode, std::vector<float>(seq_dim, 0.0f), corpus.samples[i].label.value_or(0)));
  return out;
}

}  // namespace dfept::testing
