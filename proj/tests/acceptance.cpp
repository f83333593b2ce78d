// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "dfept/cli.hpp"
#include "dfept/dataset.hpp"
#include "dfg_oracle_check.hpp"
#include "gnn_checks.hpp"
#include "model_gradcheck.hpp"
#include "readout_checks.hpp"
#include "synthetic.hpp"

using namespace dfept;
using namespace dfept::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

/// Runs a criterion body; an escaping exception is a failure, not a crash.
void criterion(int n, const std::function<void(int)>& body) {
  try {
    body(n);
  } catch (const std::exception& e) {
    report(n, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing " + p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << "  dfept exited " << code << ": " << e.str();
  return code;
}

/// Every regular file below `root`, keyed by relative path.
std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

struct Workspace {
  fs::path dir = fs::temp_directory_path() / "dfept_acceptance";
  Workspace() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() {
    if (!std::getenv("DFEPT_KEEP_TMP")) fs::remove_all(dir);
  }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

int main() {
  Workspace ws;
  const std::uint64_t seed = 20240601;
  write_jsonl(synthetic_corpus(200, seed), ws.dir / "synthetic.jsonl");
  const std::string data = ws("synthetic.jsonl");

  criterion(1, [](int n) {
    const auto t0 = Clock::now();
    const auto& cases = dfg_oracle_cases();
    std::size_t matched = 0;
    std::string first_bad;
    for (const auto& c : cases) {
      const OracleDiff d = compare_with_oracle(c);
      if (d.ok())
        ++matched;
      else if (first_bad.empty())
        first_bad = c.name + ": " + d.describe();
    }
    auto find = [&](const std::string& name) -> const DfgOracleCase* {
      for (const auto& c : cases)
        if (c.name == name) return &c;
      return nullptr;
    };
    // NULL reaches the strcpy argument through str1
    bool null_path = false;
    if (const auto* c = find("null_flow")) {
      const auto edges = edge_labels(build_case(*c));
      null_path = edges.count("NULL@12->str1@10") && edges.count("str1@10->str1@22");
    }
    bool iso = false;
    if (find("alpha_a") && find("alpha_b")) {
      const DataFlowGraph a = build_case(*find("alpha_a")), b = build_case(*find("alpha_b"));
      iso = a.size() == b.size() && a.edges == b.edges;
      for (std::size_t i = 0; iso && i < a.size(); ++i)
        iso = a.nodes[i].type_feature == b.nodes[i].type_feature && a.nodes[i].kind == b.nodes[i].kind;
    }
    const double secs = seconds_since(t0);
    const bool ok = cases.size() >= 20 && matched == cases.size() && null_path && iso && secs < 5.0;
    report(n, ok,
           "DFG oracle " + std::to_string(matched) + "/" + std::to_string(cases.size()) + " exact, NULL path " +
               (null_path ? "present" : "MISSING") + ", renamed pair " + (iso ? "isomorphic" : "DIFFERS") + ", " +
               fmt("%.3f s", secs) + (first_bad.empty() ? "" : "; first mismatch " + first_bad));
  });

  criterion(2, [](int n) {
    const CheckResult fx = adjacency_fixtures();
    const CheckResult rnd = adjacency_random(100, 77);
    report(n, fx.pass && rnd.pass,
           "adjacency fixtures max gap " + fmt("%.3g", fx.worst) + " (tol 1e-7), symmetric on " +
               std::to_string(rnd.trials) + " random graphs, worst asymmetry " + fmt("%.3g", rnd.worst) +
               (fx.pass ? "" : "; " + fx.detail) + (rnd.pass ? "" : "; " + rnd.detail));
  });

  criterion(3, [](int n) {
    const auto cases = random_gnn_cases(50, 1234);
    std::size_t max_n = 0, max_d = 0;
    for (const auto& c : cases) max_n = std::max(max_n, c.graph.n), max_d = std::max(max_d, c.d);
    const CheckResult bf = gnn_bruteforce(cases, 1e-5);
    const CheckResult loc = khop_locality(cases, 1e-6);
    const CheckResult eq = permutation_equivariance(cases, 4321, 1e-6);
    const bool ok = bf.pass && loc.pass && eq.pass && cases.size() == 50 && max_n <= 6 && max_d <= 4;
    report(n, ok,
           std::to_string(cases.size()) + " graphs (n<=" + std::to_string(max_n) + ", d<=" + std::to_string(max_d) +
               "): brute-force rel err " + fmt("%.3g", bf.worst) + ", locality drift " + fmt("%.3g", loc.worst) +
               ", equivariance gap " + fmt("%.3g", eq.worst) + (bf.pass ? "" : "; " + bf.detail) +
               (loc.pass ? "" : "; " + loc.detail) + (eq.pass ? "" : "; " + eq.detail));
  });

  criterion(4, [](int n) {
    const auto t0 = Clock::now();
    const ModelGradReport rep = model_gradient_check(20, 2024, 1e-4);
    const double secs = seconds_since(t0);
    bool ok = secs < 60.0 && rep.worst <= 1e-4;
    std::string classes;
    for (const auto& [cls, w] : rep.worst_by_class) {
      ok = ok && w <= 1e-4;
      classes += " " + cls + "=" + fmt("%.1e", w);
    }
    for (const char* need : {"embedding", "gcn.w", "ggnn.wz", "ggnn.uz", "ggnn.wr", "ggnn.ur", "ggnn.wo", "ggnn.uo",
                             "att.gate_w", "att.trans_w", "fusion.w1", "fusion.w2"})
      if (!rep.worst_by_class.count(need)) ok = false, classes += " " + std::string(need) + "=UNCHECKED";
    report(n, ok,
           "20 trials per GNN kind, " + std::to_string(rep.checked) + " entries, worst " + fmt("%.2e", rep.worst) +
               " at " + rep.worst_where + ", " + fmt("%.2f s", secs) + ";" + classes);
  });

  criterion(5, [](int n) {
    const CheckResult r = pooling_identities(100, 55);
    report(n, r.pass,
           std::to_string(r.trials) + " random matrices: united == sum*max bitwise, four modes permutation-invariant" +
               (r.pass ? "" : "; " + r.detail));
  });

  criterion(6, [](int n) {
    const PeReport r = positional_checks();
    report(n, r.result.pass,
           "P[0]=" + fmt("%.17g", r.p0) + ", |P[1]-cos 1|=" + fmt("%.3g", std::abs(r.p1 - std::cos(1.0))) +
               ", off mode bitwise identity, second post-pool application rejected" +
               (r.result.pass ? "" : "; " + r.result.detail));
  });

  criterion(7, [](int n) {
    auto counts = [](std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
      std::vector<int> p, l;
      for (std::size_t i = 0; i < tp; ++i) p.push_back(1), l.push_back(1);
      for (std::size_t i = 0; i < tn; ++i) p.push_back(0), l.push_back(0);
      for (std::size_t i = 0; i < fp; ++i) p.push_back(1), l.push_back(0);
      for (std::size_t i = 0; i < fn; ++i) p.push_back(0), l.push_back(1);
      return compute_metrics(p, l);
    };
    double worst = 0;
    auto gap = [&](const MetricsReport& m, double a, double pr, double re, double f) {
      for (double g : {m.accuracy - a, m.precision - pr, m.recall - re, m.f1 - f}) worst = std::max(worst, std::abs(g));
    };
    gap(counts(2, 2, 0, 0), 1, 1, 1, 1);
    gap(counts(1, 1, 1, 1), 0.5, 0.5, 0.5, 0.5);
    gap(counts(2, 5, 1, 2), 0.7, 2.0 / 3.0, 0.5, 4.0 / 7.0);
    bool zero_ok = true;
    try {
      const MetricsReport a = compute_metrics({0, 0, 0}, {0, 0, 0});
      const MetricsReport b = compute_metrics({1, 1}, {0, 0});
      const MetricsReport c = compute_metrics({0, 0}, {1, 1});
      for (const auto* m : {&a, &b, &c}) zero_ok = zero_ok && m->precision == 0 && m->recall == 0 && m->f1 == 0;
    } catch (...) {
      zero_ok = false;
    }
    report(n, worst <= 1e-12 && zero_ok,
           "three examples max gap " + fmt("%.3g", worst) + " (4/7 F1 included), zero division " +
               (zero_ok ? "gives 0" : "BROKEN"));
  });

  criterion(8, [](int n) {
    const SplitSizes s = split_sizes(27318);
    report(n, s.train == 21854 && s.valid == 2732 && s.test == 2732,
           "27318 -> " + std::to_string(s.train) + "/" + std::to_string(s.valid) + "/" + std::to_string(s.test));
  });

  const std::vector<std::string> learn_args{
      "--seed",     "7",    "train",  "--dataset", data,     "--gnn",          "gcn",  "--pool",  "united",
      "--pe",       "post-pool",      "--seq-embeddings",    "zero", "--seq-dim", "16", "--dim",   "32",
      "--optimizer", "adam", "--lr",  "0.01",      "--epochs", "200",           "--batch-size",   "16"};

  criterion(9, [&](int n) {
    auto args = learn_args;
    args.insert(args.begin() + 3, {"--out", ws("learn")});
    const auto t0 = Clock::now();
    const int code = cli(args);
    const double secs = seconds_since(t0);
    if (code != 0) return report(n, false, "train exited " + std::to_string(code));
    const auto m = nlohmann::json::parse(slurp(ws.dir / "learn/metrics.json"));
    const auto cfg = nlohmann::json::parse(slurp(ws.dir / "learn/config.json"));
    const double acc = m["test"]["accuracy"], f1 = m["test"]["f1"];
    const auto sizes = cfg["data"]["split_sizes"];
    const bool ok = acc >= 0.95 && f1 >= 0.95 && secs < 600 && sizes == nlohmann::json{320, 40, 40};
    report(n, ok,
           "400 synthetic functions, zero sequence vectors, GCN+united+post-pool, split " + sizes.dump() +
               ": test accuracy " + fmt("%.4f", acc) + ", F1 " + fmt("%.4f", f1) + " (best epoch " +
               std::to_string(m["best_epoch"].get<int>()) + " of 200), " + fmt("%.1f s", secs));
  });

  criterion(10, [&](int n) {
    // each command twice into separate directories; primary outputs must match byte for byte
    std::vector<std::string> diffs;
    auto twice = [&](const std::string& name, std::vector<std::string> args, const std::vector<std::string>& files) {
      for (const char* run : {"1", "2"}) {
        auto a = args;
        a.insert(a.end(), {"--out", ws(name + run)});
        if (cli(a) != 0) return diffs.push_back(name + " run " + run + " failed");
      }
      const auto a = tree_bytes(ws.dir / (name + "1")), b = tree_bytes(ws.dir / (name + "2"));
      for (const auto& f : files)
        if (!a.count(f) || a.at(f) != b.at(f)) diffs.push_back(name + "/" + f);
      for (const auto& [f, bytes] : a)
        if (f != "config.json" && (!b.count(f) || b.at(f) != bytes)) diffs.push_back(name + "/" + f);
    };
    const std::string small = ws("small.jsonl");
    write_jsonl(synthetic_corpus(20, 99), small);
    twice("extract", {"--seed", "3", "--jobs", "4", "extract", "--dataset", small}, {"summary.json"});
    twice("embed", {"--seed", "3", "embed", "--dataset", small, "--dim", "8"}, {"table.json", "table.bin"});
    twice("train", {"--seed", "3", "train", "--dataset", small, "--dim", "8", "--seq-embeddings", "random:5",
                    "--seq-dim", "4", "--epochs", "5", "--optimizer", "adam"},
          {"checkpoint.bin", "metrics.json", "history.csv"});
    twice("eval", {"--jobs", "4", "eval", "--dataset", small, "--checkpoint", ws("train1/checkpoint.bin"), "--split",
                   "all", "--seq-embeddings", "random:5", "--seq-dim", "4"},
          {"metrics.json", "predictions.jsonl"});
    twice("grid", {"--seed", "3", "grid", "--dataset", small, "--dim", "8", "--seq-dim", "4", "--epochs", "3"},
          {"grid.tsv", "grid.json"});
    std::string list;
    for (const auto& d : diffs) list += " " + d;
    report(n, diffs.empty(),
           "extract, embed, train, eval and grid each run twice: " +
               (diffs.empty() ? std::string("checkpoints, metrics and all other outputs byte-identical")
                              : "differences in" + list));
  });

  criterion(11, [&](int n) {
    const auto t0 = Clock::now();
    const int code = cli({"--seed", "7", "grid", "--dataset", data, "--out", ws("grid"), "--dim", "32", "--seq-dim",
                          "16", "--optimizer", "adam", "--epochs", "30", "--batch-size", "16"});
    const double secs = seconds_since(t0);
    if (code != 0) return report(n, false, "grid exited " + std::to_string(code));
    const auto rows = nlohmann::json::parse(slurp(ws.dir / "grid/grid.json"));
    const std::vector<std::string> want{"GCN-sum",  "GCN-max",  "GCN-mean",  "GCN-uni",
                                        "GGNN-sum", "GGNN-max", "GGNN-mean", "GGNN-uni"};
    std::vector<std::string> got;
    std::string scores;
    bool complete = true;
    for (const auto& r : rows) {
      got.push_back(r["config"]);
      complete = complete && r.contains("test") && r["test"].contains("f1");
      if (complete) scores += " " + got.back() + "=" + fmt("%.3f", r["test"]["accuracy"].get<double>());
    }
    const std::string tsv = slurp(ws.dir / "grid/grid.tsv");
    const bool ok = got == want && complete && std::count(tsv.begin(), tsv.end(), '\n') == 9;
    report(n, ok,
           std::to_string(got.size()) + " configurations on the 400-function corpus, " + fmt("%.1f s", secs) +
               "; test accuracy" + scores);
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures;
}
