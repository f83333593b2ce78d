#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

#include "dfept/train.hpp"
#include "synthetic.hpp"

using namespace dfept;
using namespace dfept::testing;

namespace {

struct Fixture {
  PreparedCorpus data;
  std::vector<GraphSample> train, valid;
  ModelConfig cfg;
};

Fixture small_fixture(std::size_t per_class = 20) {
  Fixture f;
  f.data = prepare(synthetic_corpus(per_class, 17), 8, 4, AdjacencyMode::Symmetric, 3);
  for (std::size_t i = 0; i < f.data.samples.size(); ++i)
    (i % 5 == 0 ? f.valid : f.train).push_back(f.data.samples[i]);
  f.cfg.dim = 8;
  f.cfg.seq_dim = 4;
  f.cfg.seed = 9;
  f.cfg.gcn_bias = true;
  return f;
}

std::vector<Matrix<float>> values(Model& m) {
  std::vector<Matrix<float>> out;
  for (Parameter<float>* p : m.parameters()) out.push_back(p->value);
  return out;
}

void expect_error(ErrorKind kind, const std::function<void()>& fn) {
  try {
    fn();
    ADD_FAILURE() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  for (double lr : {-0.1, std::nan(""), std::numeric_limits<double>::infinity()}) {
    TrainConfig bad;
    bad.lr = lr;
    expect_error(ErrorKind::ContractViolation, [&] { bad.validate(); });
  }
  TrainConfig e0;
  e0.epochs = 0;
  expect_error(ErrorKind::ContractViolation, [&] { e0.validate(); });
  TrainConfig b0;
  b0.batch_size = 0;
  expect_error(ErrorKind::ContractViolation, [&] { b0.validate(); });
  TrainConfig opt;
  opt.optimizer = "rmsprop";
  expect_error(ErrorKind::UnsupportedFormat, [&] { opt.validate(); });
}

TEST(Train, EmptyTrainingSplit) {
  Fixture f = small_fixture(2);
  Model m = Model::create(f.cfg, f.data.table);
  expect_error(ErrorKind::EmptyDataset, [&] { train(m, {}, f.valid, TrainConfig{}); });
  expect_error(ErrorKind::EmptyDataset, [&] { evaluate(m, {}); });
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  Fixture f = small_fixture(5);
  Model m = Model::create(f.cfg, f.data.table);
  const auto before = values(m);
  for (const char* opt : {"sgd", "momentum", "adam"}) {
    TrainConfig tc;
    tc.lr = 0.0;
    tc.epochs = 2;
    tc.batch_size = 4;
    tc.optimizer = opt;
    TrainResult r = train(m, f.train, f.valid, tc);
    EXPECT_EQ(values(r.last), before) << opt;
    EXPECT_EQ(values(r.best), before) << opt;
  }
}

TEST(Train, HistoryHasTrainAndValidRows) {
  Fixture f = small_fixture(5);
  TrainConfig tc;
  tc.epochs = 3;
  TrainResult r = train(Model::create(f.cfg, f.data.table), f.train, f.valid, tc);
  ASSERT_EQ(r.history.size(), 6u);
  EXPECT_EQ(r.history[0].split, "train");
  EXPECT_EQ(r.history[1].split, "valid");
  EXPECT_EQ(r.history[5].epoch, 3u);
  EXPECT_GE(r.best_epoch, 1u);
  EXPECT_LE(r.best_epoch, 3u);
  const std::string csv = history_csv(r.history);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,split,loss,accuracy,precision,recall,f1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Train, RunsAreBitwiseReproducible) {
  Fixture f = small_fixture(8);
  TrainConfig tc;
  tc.epochs = 4;
  tc.batch_size = 5;
  tc.optimizer = "adam";
  tc.seed = 21;
  TrainResult a = train(Model::create(f.cfg, f.data.table), f.train, f.valid, tc);
  TrainResult b = train(Model::create(f.cfg, f.data.table), f.train, f.valid, tc);
  EXPECT_EQ(history_csv(a.history), history_csv(b.history));
  EXPECT_EQ(checkpoint_bytes(a.best), checkpoint_bytes(b.best));
  EXPECT_EQ(checkpoint_bytes(a.last), checkpoint_bytes(b.last));

  tc.seed = 22;
  TrainResult c = train(Model::create(f.cfg, f.data.table), f.train, f.valid, tc);
  EXPECT_NE(checkpoint_bytes(a.last), checkpoint_bytes(c.last));
}

TEST(Train, LearnsTheSyntheticTask) {
  Fixture f = small_fixture(40);
  TrainConfig tc;
  tc.epochs = 40;
  tc.batch_size = 8;
  tc.optimizer = "adam";
  TrainResult r = train(Model::create(f.cfg, f.data.table), f.train, f.valid, tc);
  EXPECT_GE(r.best_f1, 0.9);
  EXPECT_LT(r.history.back().loss, r.history[1].loss);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  Fixture f = small_fixture(5);
  TrainConfig tc;
  tc.epochs = 2;
  TrainResult r = train(Model::create(f.cfg, f.data.table), f.train, f.valid, tc);
  const auto path = std::filesystem::temp_directory_path() / "dfept_test_ckpt.bin";
  save_checkpoint(r.last, path);
  Model loaded = load_checkpoint(path);
  EXPECT_EQ(checkpoint_bytes(loaded), checkpoint_bytes(r.last));
  EXPECT_EQ(values(loaded), values(r.last));
  for (const GraphSample& s : f.valid) EXPECT_EQ(loaded.predict(s).logits, r.last.predict(s).logits);
  std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptFileIsRejected) {
  const auto path = std::filesystem::temp_directory_path() / "dfept_test_bad_ckpt.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(load_checkpoint(path), Error);
  std::filesystem::remove(path);
}

TEST(Predict, ParallelMatchesSequentialOrder) {
  Fixture f = small_fixture(10);
  Model m = Model::create(f.cfg, f.data.table);
  const auto seq = predict(m, f.data.samples, 1);
  for (unsigned jobs : {2u, 3u, 8u, 64u}) {
    const auto par = predict(m, f.data.samples, jobs);
    ASSERT_EQ(par.size(), seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
      EXPECT_EQ(par[i].logits, seq[i].logits) << i;
      EXPECT_EQ(par[i].label, seq[i].label) << i;
    }
  }
  const Evaluation a = evaluate(m, f.data.samples, 1), b = evaluate(m, f.data.samples, 4);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.metrics.tp, b.metrics.tp);
}
