#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dfept/cli.hpp"
#include "dfg_oracle.hpp"
#include "synthetic.hpp"

using namespace dfept;
using namespace dfept::testing;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("dfept_cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override {
    if (!std::getenv("DFEPT_KEEP_TMP")) fs::remove_all(dir);
  }

  std::string p(const std::string& name) const { return (dir / name).string(); }

  std::string synthetic(std::size_t per_class, const std::string& name = "data.jsonl") const {
    write_jsonl(synthetic_corpus(per_class, 5), dir / name);
    return p(name);
  }

  std::string lines(const std::string& name, const std::vector<std::string>& rows) const {
    std::ofstream out(dir / name);
    for (const auto& r : rows) out << r << "\n";
    return p(name);
  }
};

std::string row(const std::string& code, int target, int idx) {
  return nlohmann::json{{"func", code}, {"target", target}, {"idx", idx}}.dump();
}

}  // namespace

TEST_F(CliTest, ExtractTwoSamples) {
  const auto data = lines("two.jsonl", {row("int f(int a) { int b = a; return b; }", 0, 1),
                                        row("void g(char *s) { char *p = NULL; use(p); }", 1, 2)});
  const CliRun r = cli({"extract", "--dataset", data, "--out", p("ex")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "ex/graphs/1.json"));
  EXPECT_TRUE(fs::exists(dir / "ex/graphs/2.json"));
  const auto summary = nlohmann::json::parse(slurp(dir / "ex/summary.json"));
  EXPECT_EQ(summary["samples"], 2);
  EXPECT_EQ(summary["parsed"], 2);
  EXPECT_EQ(summary["failed"], 0);
  EXPECT_TRUE(fs::exists(dir / "ex/config.json"));
  // the written graph reads back
  EXPECT_NO_THROW(graph_from_json(slurp(dir / "ex/graphs/2.json")));
}

TEST_F(CliTest, ExtractKeepsGoingPastBadSamples) {
  const auto data = lines("bad.jsonl", {row("int f(int a) { return a; }", 0, 1), row("", 1, 2)});
  const CliRun r = cli({"extract", "--dataset", data, "--out", p("ex")});
  EXPECT_EQ(r.code, 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "ex/summary.json"));
  EXPECT_EQ(summary["parsed"], 1);
  EXPECT_EQ(summary["failed"], 1);
  EXPECT_NE(r.err.find("'2'"), std::string::npos);
}

TEST_F(CliTest, ExtractIsIdempotent) {
  const auto data = synthetic(10);
  ASSERT_EQ(cli({"extract", "--dataset", data, "--out", p("a"), "--jobs", "3"}).code, 0);
  ASSERT_EQ(cli({"extract", "--dataset", data, "--out", p("b"), "--jobs", "1"}).code, 0);
  for (const auto& e : fs::directory_iterator(dir / "a/graphs"))
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b/graphs" / e.path().filename())) << e.path();
  EXPECT_EQ(slurp(dir / "a/summary.json"), slurp(dir / "b/summary.json"));
}

TEST_F(CliTest, ExportDotShowsNullReachingTheUse) {
  {
    std::ofstream src(dir / "vuln.c");
    src << dfg_oracle_cases()[3].code;
  }
  const CliRun r = cli({"export-dot", "--source", p("vuln.c")});
  ASSERT_EQ(r.code, 0) << r.err;
  DataFlowGraph g = extract_dfg(SourceFunction{"vuln", dfg_oracle_cases()[3].code, std::nullopt});
  EXPECT_EQ(r.out, export_graph(g, "dot"));
  EXPECT_NE(r.out.find("NULL@12"), std::string::npos);

  ASSERT_EQ(cli({"export-dot", "--source", p("vuln.c"), "--format", "json", "--out", p("g.json")}).code, 0);
  EXPECT_EQ(slurp(dir / "g.json"), export_graph(g, "json") + "\n");
}

TEST_F(CliTest, ExportDotUnknownId) {
  const auto data = synthetic(2);
  EXPECT_EQ(cli({"export-dot", "--dataset", data, "--id", "no-such-id"}).code, 2);
}

TEST_F(CliTest, EmbedWritesLoadableTable) {
  const auto data = synthetic(5);
  ASSERT_EQ(cli({"embed", "--dataset", data, "--out", p("em"), "--dim", "6"}).code, 0);
  EmbeddingTable t = load_embedding_table(dir / "em/table.json");
  EXPECT_EQ(t.matrix.cols(), 6u);
  EXPECT_TRUE(t.vocab.contains("char"));
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  const auto data = synthetic(2);
  EXPECT_EQ(cli({"train", "--dataset", data, "--out", p("t"), "--pool", "median"}).code, 2);
  EXPECT_EQ(cli({"train", "--dataset", data, "--out", p("t"), "--gnn", "gat"}).code, 2);
  EXPECT_EQ(cli({"train", "--dataset", data}).code, 2);
  EXPECT_EQ(cli({"train", "--dataset", p("missing.jsonl"), "--out", p("t")}).code, 2);
  EXPECT_EQ(cli({"eval", "--dataset", data, "--checkpoint", p("none.bin"), "--out", p("e")}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = DFEPT_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status(bin + " --help"), 0);
  EXPECT_EQ(status(bin + " train --pool median"), 2);
  const auto data = synthetic(2);
  EXPECT_EQ(status(bin + " extract --dataset " + data + " --out " + p("ex")), 0);
}

TEST_F(CliTest, TrainWritesArtifactsAndLossFalls) {
  const auto data = synthetic(40);
  const CliRun r = cli({"--seed", "4", "train", "--dataset", data, "--out", p("t"), "--dim", "32", "--seq-dim", "16",
                     "--optimizer", "adam", "--epochs", "30", "--batch-size", "16"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"checkpoint.bin", "history.csv", "metrics.json", "config.json"})
    EXPECT_TRUE(fs::exists(dir / "t" / f)) << f;
  EXPECT_NE(r.out.find("f1"), std::string::npos);

  std::istringstream hist(slurp(dir / "t/history.csv"));
  std::string line;
  std::getline(hist, line);
  std::vector<double> loss;
  while (std::getline(hist, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.at(1) == "train") loss.push_back(std::stod(cells.at(2)));
  }
  ASSERT_EQ(loss.size(), 30u);
  // five-epoch moving average
  std::vector<double> smooth;
  for (std::size_t i = 0; i + 5 <= loss.size(); ++i) {
    double s = 0;
    for (std::size_t k = i; k < i + 5; ++k) s += loss[k];
    smooth.push_back(s / 5);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i) EXPECT_LE(smooth[i], smooth[i - 1]) << "window " << i;

  const auto cfg = nlohmann::json::parse(slurp(dir / "t/config.json"));
  EXPECT_EQ(cfg["seed"], 4);
  EXPECT_EQ(cfg["model"]["pool"], "united");
  EXPECT_EQ(cfg["model"]["pe"], "post-pool");
  EXPECT_EQ(cfg["train"]["optimizer"], "adam");
}

TEST_F(CliTest, TrainTwiceIsByteIdentical) {
  const auto data = synthetic(10);
  const std::vector<std::string> common{"--dataset", data, "--dim", "8", "--seq-embeddings", "random:3",
                                        "--seq-dim", "4", "--epochs", "3"};
  for (const char* out : {"a", "b"}) {
    std::vector<std::string> args{"--seed", "11", "train", "--out", p(out)};
    args.insert(args.end(), common.begin(), common.end());
    ASSERT_EQ(cli(args).code, 0);
  }
  for (const char* f : {"checkpoint.bin", "history.csv", "metrics.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}

TEST_F(CliTest, PeOffIsRecorded) {
  const auto data = synthetic(5);
  ASSERT_EQ(cli({"train", "--dataset", data, "--out", p("t"), "--pe", "off", "--dim", "4", "--epochs", "1"}).code, 0);
  const auto cfg = nlohmann::json::parse(slurp(dir / "t/config.json"));
  EXPECT_EQ(cfg["model"]["pe"], "off");
  Model m = load_checkpoint(dir / "t/checkpoint.bin");
  EXPECT_EQ(m.config.pe, PeMode::Off);
}

TEST_F(CliTest, EvalScoresACheckpoint) {
  const auto data = synthetic(10);
  ASSERT_EQ(cli({"train", "--dataset", data, "--out", p("t"), "--dim", "8", "--epochs", "2"}).code, 0);
  const CliRun r = cli({"eval", "--dataset", data, "--checkpoint", p("t/checkpoint.bin"), "--out", p("e"), "--split",
                     "all", "--jobs", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(slurp(dir / "e/metrics.json"));
  const int total = m["tp"].get<int>() + m["tn"].get<int>() + m["fp"].get<int>() + m["fn"].get<int>();
  EXPECT_EQ(total, 20);
  std::istringstream preds(slurp(dir / "e/predictions.jsonl"));
  std::size_t n = 0;
  for (std::string line; std::getline(preds, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["probabilities"].size(), 2u);
  }
  EXPECT_EQ(n, 20u);
}

TEST_F(CliTest, GridHasEightNamedRows) {
  const auto data = synthetic(10);
  const std::vector<std::string> args{"--seed", "2", "grid", "--dataset", data, "--out", p("g"), "--dim", "8",
                                      "--seq-dim", "4", "--epochs", "2"};
  ASSERT_EQ(cli(args).code, 0);
  const auto rows = nlohmann::json::parse(slurp(dir / "g/grid.json"));
  std::vector<std::string> names;
  for (const auto& r : rows) names.push_back(r["config"]);
  EXPECT_EQ(names, (std::vector<std::string>{"GCN-sum", "GCN-max", "GCN-mean", "GCN-uni", "GGNN-sum", "GGNN-max",
                                             "GGNN-mean", "GGNN-uni"}));
  const std::string tsv = slurp(dir / "g/grid.tsv");
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 9);
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "config\taccuracy\tf1\tprecision\trecall");

  std::vector<std::string> again = args;
  again[6] = p("g2");
  ASSERT_EQ(cli(again).code, 0);
  EXPECT_EQ(slurp(dir / "g2/grid.tsv"), tsv);
  EXPECT_EQ(slurp(dir / "g2/grid.json"), slurp(dir / "g/grid.json"));
}

TEST_F(CliTest, GridAblationDoublesRows) {
  const auto data = synthetic(5);
  ASSERT_EQ(cli({"grid", "--dataset", data, "--out", p("g"), "--dim", "4", "--epochs", "1", "--ablate-pe"}).code, 0);
  const auto rows = nlohmann::json::parse(slurp(dir / "g/grid.json"));
  ASSERT_EQ(rows.size(), 16u);
  std::size_t off = 0;
  for (const auto& r : rows) off += r["pe"] == "off";
  EXPECT_EQ(off, 8u);
}
