#include "dfept/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dfept/dataset.hpp"
#include "dfept/dfg.hpp"
#include "dfept/embed.hpp"
#include "dfept/model.hpp"
#include "dfept/train.hpp"

namespace fs = std::filesystem;

namespace dfept {
namespace {

struct Options {
  std::string dataset;
  std::string out;
  std::uint64_t seed = 0;
  std::string gnn = "gcn";
  std::string pool = "united";
  std::string pe = "post-pool";
  std::string adjacency = "symmetric";
  std::size_t depth = 2;
  std::size_t dim = 128;
  std::string table;
  std::string seq = "zero";
  std::size_t seq_dim = 128;
  std::size_t hidden = 0;
  std::size_t epochs = 50;
  double lr = 0.01;
  std::size_t batch_size = 32;
  std::string optimizer = "sgd";
  double momentum = 0.9;
  bool class_weights = false;
  std::string split_manifest;
  std::string strategy = "shuffled";
  bool back_edges = false;
  bool train_embeddings = false;
  bool freeze_graph = false;
  bool gcn_bias = false;
  std::string subtoken_pooling = "mean";
  unsigned jobs = 1;
  bool verbose = false;
  // extract / export-dot / eval
  bool dump_ast = false;
  std::string format = "json";
  std::string dot_format = "dot";
  std::string source;
  std::string id;
  std::string checkpoint;
  std::string split_name = "test";
  bool ablate_pe = false;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  f << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path ensure_dir(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorKind::IoError, "no output directory given");
  fs::create_directories(dir);
  return dir;
}

std::string file_stem_for(const std::string& id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  if (out.empty() || out[0] == '.') out.insert(out.begin(), '_');
  return out;
}

SplitStrategy parse_strategy(const std::string& s) {
  if (s == "shuffled") return SplitStrategy::Shuffled;
  if (s == "sequential") return SplitStrategy::Sequential;
  throw Error(ErrorKind::UnsupportedFormat, "unknown split strategy '" + s + "'");
}

ModelConfig model_config(const Options& o) {
  ModelConfig c;
  c.gnn = parse_gnn_kind(o.gnn);
  c.depth = o.depth;
  c.pool = parse_pool_mode(o.pool);
  c.pe = parse_pe_mode(o.pe);
  c.adjacency = parse_adjacency_mode(o.adjacency);
  c.dim = o.dim;
  c.hidden = o.hidden;
  c.gcn_bias = o.gcn_bias;
  c.subtoken_pooling = parse_subtoken_pooling(o.subtoken_pooling);
  c.train_graph_branch = !o.freeze_graph;
  c.train_embeddings = o.train_embeddings;
  c.seed = o.seed;
  c.back_edges = o.back_edges;
  return c;
}

TrainConfig train_config(const Options& o) {
  TrainConfig t;
  t.lr = o.lr;
  t.epochs = o.epochs;
  t.batch_size = o.batch_size;
  t.seed = derive_seed(o.seed, "train");
  t.optimizer = o.optimizer;
  t.momentum = o.momentum;
  t.class_weights = o.class_weights;
  t.validate();
  return t;
}

struct ExtractSummary {
  std::size_t samples = 0, parsed = 0, error_nodes = 0, empty_graphs = 0, failed = 0;
};

struct Extracted {
  DataFlowGraph graph;
  std::string ast;
  bool parsed = false;
  bool has_error = false;
  std::string failure;
};

Extracted extract_one(const SourceFunction& s, const DfgOptions& opts, bool keep_ast) {
  Extracted e;
  e.graph.function_id = s.id;
  try {
    SyntaxTree tree = parse_function(s);
    e.parsed = true;
    e.has_error = tree.has_error();
    if (keep_ast) e.ast = to_sexpr(tree);
    e.graph = build_dfg(tree, collect_type_bindings(tree), s.id, opts);
  } catch (const Error& ex) {
    e.failure = ex.what();
  }
  return e;
}

/// One graph per sample in corpus order; failures become empty graphs.
std::vector<Extracted> extract_corpus(const std::vector<SourceFunction>& samples, const DfgOptions& opts, unsigned jobs,
                                      bool keep_ast) {
  std::vector<Extracted> out(samples.size());
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, samples.size()))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = extract_one(samples[i], opts, keep_ast);
    return out;
  }
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w)
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < samples.size(); i += jobs) out[i] = extract_one(samples[i], opts, keep_ast);
    });
  for (auto& t : workers) t.join();
  return out;
}

ExtractSummary summarize(const std::vector<Extracted>& all, std::ostream& err) {
  ExtractSummary s;
  s.samples = all.size();
  for (const auto& e : all) {
    if (!e.failure.empty()) {
      ++s.failed;
      err << "warning: sample '" << e.graph.function_id << "': " << e.failure << '\n';
      continue;
    }
    ++s.parsed;
    if (e.has_error) ++s.error_nodes;
    if (e.graph.empty()) ++s.empty_graphs;
  }
  return s;
}

nlohmann::ordered_json summary_json(const ExtractSummary& s) {
  nlohmann::ordered_json j;
  j["samples"] = s.samples;
  j["parsed"] = s.parsed;
  j["error_nodes"] = s.error_nodes;
  j["empty_graphs"] = s.empty_graphs;
  j["failed"] = s.failed;
  return j;
}

/// Everything train, grid and eval need from a dataset.
struct Prepared {
  Corpus corpus;
  CorpusSplit split;
  std::vector<Extracted> extracted;
  std::map<std::string, std::size_t> index;
  EmbeddingTable table;
  std::map<std::string, std::vector<float>> sequence;
  std::size_t seq_dim = 0;
};

CorpusSplit split_corpus(const Corpus& corpus, const Options& o) {
  if (!o.split_manifest.empty()) return apply_manifest(corpus, load_split_manifest(o.split_manifest));
  return split(corpus, SplitSpec{derive_seed(o.seed, "split"), parse_strategy(o.strategy)});
}

void load_sequences(Prepared& p, const Options& o) {
  std::vector<std::string> ids;
  for (const auto& s : p.corpus.samples) ids.push_back(s.id);
  const auto seqs = resolve_sequence_embeddings(parse_sequence_policy(o.seq, o.seq_dim), ids);
  for (const auto& e : seqs) {
    if (p.seq_dim == 0) p.seq_dim = e.vector.size();
    p.sequence[e.function_id] = e.vector;
  }
}

Prepared prepare(const Options& o, std::ostream& err, bool need_table) {
  Prepared p;
  p.corpus = load_jsonl(o.dataset);
  if (p.corpus.samples.empty()) throw Error(ErrorKind::EmptyDataset, "dataset " + o.dataset + " has no samples");
  p.extracted = extract_corpus(p.corpus.samples, DfgOptions{o.back_edges}, o.jobs, false);
  summarize(p.extracted, err);
  for (std::size_t i = 0; i < p.corpus.samples.size(); ++i) p.index[p.corpus.samples[i].id] = i;
  if (need_table) {
    if (!o.table.empty()) {
      p.table = load_embedding_table(o.table);
    } else {
      std::vector<DataFlowGraph> graphs;
      for (const auto& e : p.extracted) graphs.push_back(e.graph);
      p.table = init_random_table(collect_type_tokens(graphs), o.dim, derive_seed(o.seed, "embedding"));
    }
  }
  load_sequences(p, o);
  return p;
}

std::vector<GraphSample> samples_for(const Prepared& p, const Corpus& part, const EmbeddingTable& table,
                                     AdjacencyMode mode) {
  std::vector<GraphSample> out;
  out.reserve(part.samples.size());
  for (const auto& s : part.samples) {
    const Extracted& e = p.extracted.at(p.index.at(s.id));
    out.push_back(make_sample(e.graph, table, mode, p.sequence.at(s.id), s.label.value_or(0)));
  }
  return out;
}

nlohmann::ordered_json metrics_object(const MetricsReport& m) { return nlohmann::ordered_json::parse(metrics_json(m)); }

nlohmann::ordered_json options_json(const Options& o, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["dataset"] = o.dataset;
  j["out"] = o.out;
  j["seed"] = o.seed;
  j["jobs"] = o.jobs;
  j["back_edges"] = o.back_edges;
  return j;
}

nlohmann::ordered_json data_json(const Options& o, const Prepared& p) {
  nlohmann::ordered_json j;
  j["split_manifest"] = o.split_manifest;
  j["strategy"] = o.split_manifest.empty() ? o.strategy : "manifest";
  j["split_sizes"] = {p.split.train.size(), p.split.valid.size(), p.split.test.size()};
  j["table"] = o.table.empty() ? "random" : o.table;
  j["table_dim"] = p.table.dim();
  j["vocab_size"] = p.table.vocab.size();
  j["seq_embeddings"] = o.seq;
  j["seq_dim"] = p.seq_dim;
  return j;
}

// ---------------------------------------------------------------- commands

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path dir = ensure_dir(o.out);
  const GraphFormat fmt = parse_graph_format(o.format);
  const Corpus corpus = load_jsonl(o.dataset);
  const auto all = extract_corpus(corpus.samples, DfgOptions{o.back_edges}, o.jobs, o.dump_ast);
  const ExtractSummary summary = summarize(all, err);
  const fs::path graphs = dir / "graphs";
  fs::create_directories(graphs);
  std::set<std::string> used;
  for (const auto& e : all) {
    std::string stem = file_stem_for(e.graph.function_id);
    for (int k = 2; !used.insert(stem).second; ++k) stem = file_stem_for(e.graph.function_id) + "~" + std::to_string(k);
    write_file(graphs / (stem + (fmt == GraphFormat::Json ? ".json" : ".dot")), export_graph(e.graph, fmt) + "\n");
    if (o.dump_ast && e.parsed) write_file(graphs / (stem + ".ast"), e.ast + "\n");
  }
  auto cfg = options_json(o, "extract");
  cfg["format"] = o.format;
  cfg["dump_ast"] = o.dump_ast;
  write_file(dir / "config.json", cfg.dump(2) + "\n");
  const std::string s = summary_json(summary).dump(2);
  write_file(dir / "summary.json", s + "\n");
  out << s << '\n';
  return kExitOk;
}

int cmd_embed(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path dir = ensure_dir(o.out);
  const Corpus corpus = load_jsonl(o.dataset);
  const auto all = extract_corpus(corpus.samples, DfgOptions{o.back_edges}, o.jobs, false);
  summarize(all, err);
  std::vector<DataFlowGraph> graphs;
  for (const auto& e : all) graphs.push_back(e.graph);
  const EmbeddingTable table = init_random_table(collect_type_tokens(graphs), o.dim, derive_seed(o.seed, "embedding"));
  save_embedding_table(table, dir / "table.json", "table.bin");
  auto cfg = options_json(o, "embed");
  cfg["dim"] = o.dim;
  cfg["vocab_size"] = table.vocab.size();
  write_file(dir / "config.json", cfg.dump(2) + "\n");
  out << "wrote " << (dir / "table.json").string() << " (" << table.vocab.size() << " tokens, d=" << table.dim()
      << ")\n";
  return kExitOk;
}

struct RunOutcome {
  TrainResult result;
  MetricsReport valid;
  MetricsReport test;
  bool has_valid = false, has_test = false;
};

RunOutcome train_and_score(const Prepared& p, const ModelConfig& mc_in, const TrainConfig& tc, unsigned jobs) {
  ModelConfig mc = mc_in;
  mc.seq_dim = p.seq_dim;
  const auto train_set = samples_for(p, p.split.train, p.table, mc.adjacency);
  const auto valid_set = samples_for(p, p.split.valid, p.table, mc.adjacency);
  const auto test_set = samples_for(p, p.split.test, p.table, mc.adjacency);
  RunOutcome r;
  r.result = train(Model::create(mc, p.table), train_set, valid_set, tc);
  if (!valid_set.empty()) {
    r.valid = evaluate(r.result.best, valid_set, jobs).metrics;
    r.has_valid = true;
  }
  if (!test_set.empty()) {
    r.test = evaluate(r.result.best, test_set, jobs).metrics;
    r.has_test = true;
  }
  return r;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelConfig mc = model_config(o);
  const TrainConfig tc = train_config(o);
  const fs::path dir = ensure_dir(o.out);
  Prepared p = prepare(o, err, true);
  p.split = split_corpus(p.corpus, o);
  RunOutcome r = train_and_score(p, mc, tc, o.jobs);
  if (o.verbose)
    for (const auto& h : r.result.history)
      err << "epoch " << h.epoch << ' ' << h.split << " loss=" << h.loss << " f1=" << h.metrics.f1 << '\n';

  save_checkpoint(r.result.best, dir / "checkpoint.bin");
  write_file(dir / "history.csv", history_csv(r.result.history));
  nlohmann::ordered_json m;
  m["best_epoch"] = r.result.best_epoch;
  if (r.has_valid) m["valid"] = metrics_object(r.valid);
  if (r.has_test) m["test"] = metrics_object(r.test);
  write_file(dir / "metrics.json", m.dump(2) + "\n");

  auto cfg = options_json(o, "train");
  cfg["model"] = r.result.best.config.to_json();
  cfg["train"] = tc.to_json();
  cfg["data"] = data_json(o, p);
  write_file(dir / "config.json", cfg.dump(2) + "\n");

  out << "best epoch " << r.result.best_epoch << '\n';
  if (r.has_valid) out << "validation\n" << metrics_table(r.valid);
  return kExitOk;
}

std::string grid_name(GnnKind g, PoolMode p, bool pe_off_variant) {
  std::string name = g == GnnKind::Gcn ? "GCN-" : "GGNN-";
  name += p == PoolMode::United ? "uni" : std::string(to_string(p));
  if (pe_off_variant) name += "-noPE";
  return name;
}

int cmd_grid(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelConfig base = model_config(o);
  const TrainConfig tc = train_config(o);
  const fs::path dir = ensure_dir(o.out);
  Prepared p = prepare(o, err, true);
  p.split = split_corpus(p.corpus, o);

  std::vector<bool> pe_variants{false};
  if (o.ablate_pe) pe_variants.push_back(true);

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::ostringstream tsv, table;
  tsv << "config\taccuracy\tf1\tprecision\trecall\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %9s %9s %9s %9s\n", "config", "accuracy", "f1", "precision", "recall");
  table << line;
  for (bool pe_off : pe_variants)
    for (GnnKind g : {GnnKind::Gcn, GnnKind::Ggnn})
      for (PoolMode pm : {PoolMode::Sum, PoolMode::Max, PoolMode::Mean, PoolMode::United}) {
        ModelConfig mc = base;
        mc.gnn = g;
        mc.pool = pm;
        if (pe_off) mc.pe = PeMode::Off;
        const std::string name = grid_name(g, pm, pe_off);
        RunOutcome r = train_and_score(p, mc, tc, o.jobs);
        const MetricsReport& m = r.has_test ? r.test : r.valid;
        std::snprintf(line, sizeof line, "%s\t%.4f\t%.4f\t%.4f\t%.4f\n", name.c_str(), m.accuracy, m.f1, m.precision,
                      m.recall);
        tsv << line;
        std::snprintf(line, sizeof line, "%-14s %9.4f %9.4f %9.4f %9.4f\n", name.c_str(), m.accuracy, m.f1,
                      m.precision, m.recall);
        table << line;
        nlohmann::ordered_json row;
        row["config"] = name;
        row["gnn"] = to_string(g);
        row["pool"] = to_string(pm);
        row["pe"] = to_string(mc.pe);
        row["best_epoch"] = r.result.best_epoch;
        row["test"] = metrics_object(m);
        rows.push_back(row);
        if (o.verbose) err << name << " done\n";
      }
  write_file(dir / "grid.tsv", tsv.str());
  write_file(dir / "grid.json", rows.dump(2) + "\n");
  auto cfg = options_json(o, "grid");
  cfg["model"] = base.to_json();
  cfg["model"]["seq_dim"] = p.seq_dim;
  cfg["train"] = tc.to_json();
  cfg["data"] = data_json(o, p);
  cfg["ablate_pe"] = o.ablate_pe;
  write_file(dir / "config.json", cfg.dump(2) + "\n");
  out << table.str();
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path dir = ensure_dir(o.out);
  Model model = load_checkpoint(o.checkpoint);
  Options eo = o;
  eo.back_edges = model.config.back_edges;
  Prepared p = prepare(eo, err, false);
  p.table = EmbeddingTable{model.vocab, model.embedding.value, model.tokenizer};
  Corpus part;
  if (o.split_name == "all") {
    part = p.corpus;
  } else {
    CorpusSplit s = split_corpus(p.corpus, o);
    if (o.split_name == "train") part = s.train;
    else if (o.split_name == "valid") part = s.valid;
    else if (o.split_name == "test") part = s.test;
    else throw Error(ErrorKind::UnsupportedFormat, "unknown split '" + o.split_name + "'");
  }
  if (p.seq_dim != model.config.seq_dim)
    throw Error(ErrorKind::ShapeError, "sequence embeddings have width " + std::to_string(p.seq_dim) +
                                           ", checkpoint expects " + std::to_string(model.config.seq_dim));
  const auto samples = samples_for(p, part, p.table, model.config.adjacency);
  Evaluation ev = evaluate(model, samples, o.jobs);

  std::ostringstream preds;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = samples[i].id;
    j["label"] = ev.predictions[i].label;
    j["probabilities"] = {ev.predictions[i].probabilities[0], ev.predictions[i].probabilities[1]};
    j["target"] = samples[i].label;
    preds << j.dump() << '\n';
  }
  write_file(dir / "predictions.jsonl", preds.str());
  nlohmann::ordered_json m = metrics_object(ev.metrics);
  m["loss"] = ev.loss;
  write_file(dir / "metrics.json", m.dump(2) + "\n");
  auto cfg = options_json(eo, "eval");
  cfg["checkpoint"] = o.checkpoint;
  cfg["split"] = o.split_name;
  cfg["seq_embeddings"] = o.seq;
  cfg["model"] = model.config.to_json();
  write_file(dir / "config.json", cfg.dump(2) + "\n");
  out << metrics_table(ev.metrics);
  return kExitOk;
}

int cmd_export_dot(const Options& o, std::ostream& out, std::ostream&) {
  SourceFunction fn;
  if (!o.source.empty()) {
    fn.id = o.id.empty() ? fs::path(o.source).stem().string() : o.id;
    fn.code = read_file(o.source);
  } else if (!o.dataset.empty()) {
    const Corpus corpus = load_jsonl(o.dataset);
    auto it = std::find_if(corpus.samples.begin(), corpus.samples.end(), [&](const auto& s) { return s.id == o.id; });
    if (it == corpus.samples.end()) throw Error(ErrorKind::DataError, "no sample with id '" + o.id + "'");
    fn = *it;
  } else {
    throw Error(ErrorKind::IoError, "export-dot needs --source or --dataset with --id");
  }
  const std::string text = export_graph(extract_dfg(fn, DfgOptions{o.back_edges}), o.dot_format);
  if (o.out.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    return kExitOk;
  }
  write_file(o.out, text.back() == '\n' ? text : text + "\n");
  auto cfg = options_json(o, "export-dot");
  cfg["source"] = o.source;
  cfg["id"] = fn.id;
  cfg["format"] = o.dot_format;
  write_file(o.out + ".config.json", cfg.dump(2) + "\n");
  return kExitOk;
}

void add_model_flags(CLI::App* c, Options& o) {
  c->add_option("--gnn", o.gnn, "gcn | ggnn")->capture_default_str();
  c->add_option("--pool", o.pool, "sum | max | mean | united")->capture_default_str();
  c->add_option("--pe", o.pe, "post-pool | per-node | off")->capture_default_str();
  c->add_option("--adjacency", o.adjacency, "symmetric | directed")->capture_default_str();
  c->add_option("--depth", o.depth, "GCN layers or GGNN steps")->capture_default_str();
  c->add_option("--dim", o.dim, "node feature width when no table is given")->capture_default_str();
  c->add_option("--table", o.table, "embedding table JSON");
  c->add_option("--seq-embeddings", o.seq, "zero | random:SEED | path to JSONL")->capture_default_str();
  c->add_option("--seq-dim", o.seq_dim, "width for the zero and random policies")->capture_default_str();
  c->add_option("--hidden", o.hidden, "classifier hidden width, 0 = (d + d_s) / 2")->capture_default_str();
  c->add_option("--subtoken-pooling", o.subtoken_pooling, "mean | sum | first")->capture_default_str();
  c->add_flag("--gcn-bias", o.gcn_bias, "bias term in GCN layers");
  c->add_flag("--train-embeddings", o.train_embeddings, "update the embedding table");
  c->add_flag("--freeze-graph", o.freeze_graph, "train the classifier only");
  c->add_option("--epochs", o.epochs)->capture_default_str();
  c->add_option("--lr", o.lr)->capture_default_str();
  c->add_option("--batch-size", o.batch_size)->capture_default_str();
  c->add_option("--optimizer", o.optimizer, "sgd | momentum | adam")->capture_default_str();
  c->add_option("--momentum", o.momentum)->capture_default_str();
  c->add_flag("--class-weights", o.class_weights, "inverse-frequency loss weights");
  c->add_flag("-v,--verbose", o.verbose);
}

void add_split_flags(CLI::App* c, Options& o) {
  c->add_option("--split-manifest", o.split_manifest, "JSON {train, valid, test} id lists");
  c->add_option("--strategy", o.strategy, "shuffled | sequential")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Data-flow graph vulnerability detection toolkit", "dfept"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "master seed")->capture_default_str();
  app.add_option("--jobs", o.jobs, "worker threads for extraction and evaluation")->capture_default_str();
  app.add_flag("--back-edges", o.back_edges, "add loop back-edges to the graphs");

  auto* extract = app.add_subcommand("extract", "build one graph file per sample plus summary.json");
  extract->add_option("--dataset", o.dataset)->required();
  extract->add_option("--out", o.out)->required();
  extract->add_option("--format", o.format, "json | dot")->capture_default_str();
  extract->add_flag("--dump-ast", o.dump_ast, "also write the syntax tree of each sample");

  auto* embed = app.add_subcommand("embed", "create a seeded embedding table over the dataset's type tokens");
  embed->add_option("--dataset", o.dataset)->required();
  embed->add_option("--out", o.out)->required();
  embed->add_option("--dim", o.dim)->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "train and keep the best validation checkpoint");
  train_cmd->add_option("--dataset", o.dataset)->required();
  train_cmd->add_option("--out", o.out)->required();
  add_model_flags(train_cmd, o);
  add_split_flags(train_cmd, o);

  auto* eval = app.add_subcommand("eval", "score a checkpoint on one split");
  eval->add_option("--dataset", o.dataset)->required();
  eval->add_option("--checkpoint", o.checkpoint)->required();
  eval->add_option("--out", o.out)->required();
  eval->add_option("--split", o.split_name, "train | valid | test | all")->capture_default_str();
  eval->add_option("--seq-embeddings", o.seq)->capture_default_str();
  eval->add_option("--seq-dim", o.seq_dim)->capture_default_str();
  add_split_flags(eval, o);

  auto* grid = app.add_subcommand("grid", "train every gnn x pooling combination");
  grid->add_option("--dataset", o.dataset)->required();
  grid->add_option("--out", o.out)->required();
  grid->add_flag("--ablate-pe", o.ablate_pe, "repeat the grid with positional encoding off");
  add_model_flags(grid, o);
  add_split_flags(grid, o);

  auto* dot = app.add_subcommand("export-dot", "print the graph of one function");
  dot->add_option("--source", o.source, "C file holding one function");
  dot->add_option("--dataset", o.dataset);
  dot->add_option("--id", o.id);
  dot->add_option("--out", o.out);
  dot->add_option("--format", o.dot_format, "dot | json")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*extract) return cmd_extract(o, out, err);
    if (*embed) return cmd_embed(o, out, err);
    if (*train_cmd) return cmd_train(o, out, err);
    if (*eval) return cmd_eval(o, out, err);
    if (*grid) return cmd_grid(o, out, err);
    if (*dot) return cmd_export_dot(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::ContractViolation ? kExitInternal : kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace dfept
