#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfept/dataset.hpp"
#include "dfept/model.hpp"

namespace dfept {

struct TrainConfig {
  double lr = 0.01;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// "sgd", "momentum" (heavy ball) or "adam".
  std::string optimizer = "sgd";
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Inverse-frequency loss weights per class.
  bool class_weights = false;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  MetricsReport metrics;
};

struct TrainResult {
  Model best;
  Model last;
  std::size_t best_epoch = 0;
  double best_f1 = -1.0;
  std::vector<EpochRecord> history;
};

struct Evaluation {
  double loss = 0.0;
  MetricsReport metrics;
  std::vector<Prediction<float>> predictions;
};

/// Mini-batch gradient descent on cross-entropy. Keeps the epoch with the best
/// validation F1 (training F1 when the validation split is empty).
TrainResult train(Model model, const std::vector<GraphSample>& train_set, const std::vector<GraphSample>& valid_set,
                  const TrainConfig& cfg);

/// Predictions in input order. jobs > 1 spreads samples over threads.
std::vector<Prediction<float>> predict(Model& model, const std::vector<GraphSample>& samples, unsigned jobs = 1);

Evaluation evaluate(Model& model, const std::vector<GraphSample>& samples, unsigned jobs = 1);

/// epoch,split,loss,accuracy,precision,recall,f1
std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace dfept
