#include "dfept/train.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

namespace dfept {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error(ErrorKind::ContractViolation, "learning rate must be >= 0");
  if (epochs == 0) throw Error(ErrorKind::ContractViolation, "epochs must be at least 1");
  if (batch_size == 0) throw Error(ErrorKind::ContractViolation, "batch size must be at least 1");
  if (optimizer != "sgd" && optimizer != "momentum" && optimizer != "adam")
    throw Error(ErrorKind::UnsupportedFormat, "unknown optimizer '" + optimizer + "'");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorKind::ContractViolation, "momentum must be in [0, 1)");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["lr"] = lr;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["seed"] = seed;
  j["optimizer"] = optimizer;
  if (optimizer == "momentum") j["momentum"] = momentum;
  if (optimizer == "adam") {
    j["beta1"] = beta1;
    j["beta2"] = beta2;
    j["epsilon"] = epsilon;
  }
  j["class_weights"] = class_weights;
  return j;
}

TrainResult train(Model model, const std::vector<GraphSample>& train_set, const std::vector<GraphSample>& valid_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw Error(ErrorKind::EmptyDataset, "training split is empty");

  std::array<float, 2> weight{1.0f, 1.0f};
  if (cfg.class_weights) {
    std::array<std::size_t, 2> count{0, 0};
    for (const auto& s : train_set) ++count[static_cast<std::size_t>(s.label)];
    for (std::size_t c = 0; c < 2; ++c)
      if (count[c]) weight[c] = static_cast<float>(train_set.size()) / (2.0f * static_cast<float>(count[c]));
  }

  auto params = model.trainable_parameters();
  std::map<std::string, Matrix<float>> velocity, second;
  const bool use_momentum = cfg.optimizer == "momentum";
  const bool use_adam = cfg.optimizer == "adam";
  std::size_t step = 0;
  const float lr = static_cast<float>(cfg.lr);

  Rng order_rng(derive_seed(cfg.seed, "epoch-order"));
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    std::vector<int> preds, labels;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      model.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const GraphSample& s = train_set[order[k]];
        Tape<float> t;
        Var<float> z = model.logits(t, s);
        Var<float> l = ad::softmax_cross_entropy(z, static_cast<std::size_t>(s.label),
                                                 weight[static_cast<std::size_t>(s.label)]);
        loss_sum += l.value()(0, 0);
        preds.push_back(predicted_label(softmax2(std::array<float, 2>{z.value()(0, 0), z.value()(0, 1)})));
        labels.push_back(s.label);
        t.backward(l);
      }
      const float scale = 1.0f / static_cast<float>(end - start);
      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (Parameter<float>* p : params) {
        if (use_adam) {
          auto& m = velocity.try_emplace(p->name, p->value.rows(), p->value.cols()).first->second;
          auto& v = second.try_emplace(p->name, p->value.rows(), p->value.cols()).first->second;
          for (std::size_t i = 0; i < m.size(); ++i) {
            const double g = static_cast<double>(p->grad.data()[i]) * scale;
            m.data()[i] = static_cast<float>(cfg.beta1 * m.data()[i] + (1.0 - cfg.beta1) * g);
            v.data()[i] = static_cast<float>(cfg.beta2 * v.data()[i] + (1.0 - cfg.beta2) * g * g);
            const double mh = m.data()[i] / bc1, vh = v.data()[i] / bc2;
            p->value.data()[i] -= static_cast<float>(cfg.lr * mh / (std::sqrt(vh) + cfg.epsilon));
          }
        } else if (use_momentum) {
          Matrix<float>& v = velocity.try_emplace(p->name, p->value.rows(), p->value.cols()).first->second;
          for (std::size_t i = 0; i < v.size(); ++i) {
            v.data()[i] = static_cast<float>(cfg.momentum) * v.data()[i] + p->grad.data()[i] * scale;
            p->value.data()[i] -= lr * v.data()[i];
          }
        } else {
          for (std::size_t i = 0; i < p->value.size(); ++i) p->value.data()[i] -= lr * p->grad.data()[i] * scale;
        }
      }
    }
    model.zero_grad();
    EpochRecord tr{epoch, "train", loss_sum / static_cast<double>(train_set.size()), compute_metrics(preds, labels)};
    result.history.push_back(tr);
    double score = tr.metrics.f1;
    if (!valid_set.empty()) {
      Evaluation ev = evaluate(model, valid_set);
      result.history.push_back({epoch, "valid", ev.loss, ev.metrics});
      score = ev.metrics.f1;
    }
    if (score > result.best_f1) {
      result.best_f1 = score;
      result.best_epoch = epoch;
      result.best = model;
    }
  }
  result.last = std::move(model);
  return result;
}

std::vector<Prediction<float>> predict(Model& model, const std::vector<GraphSample>& samples, unsigned jobs) {
  std::vector<Prediction<float>> out(samples.size());
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(samples.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = model.predict(samples[i]);
    return out;
  }
  // forward passes only read parameter values, so workers share one model
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (unsigned w = 0; w < jobs; ++w)
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < samples.size(); i += jobs) out[i] = model.predict(samples[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Evaluation evaluate(Model& model, const std::vector<GraphSample>& samples, unsigned jobs) {
  if (samples.empty()) throw Error(ErrorKind::EmptyDataset, "nothing to evaluate");
  Evaluation ev;
  ev.predictions = predict(model, samples, jobs);
  std::vector<int> preds, labels;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ev.loss += loss(ev.predictions[i].logits, samples[i].label);
    preds.push_back(ev.predictions[i].label);
    labels.push_back(samples[i].label);
  }
  ev.loss /= static_cast<double>(samples.size());
  ev.metrics = compute_metrics(preds, labels);
  return ev;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << "epoch,split,loss,accuracy,precision,recall,f1\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.split.c_str(), r.loss,
                  r.metrics.accuracy, r.metrics.precision, r.metrics.recall, r.metrics.f1);
    out << buf;
  }
  return out.str();
}

}  // namespace dfept
