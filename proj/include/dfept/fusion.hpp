#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dfept/autodiff.hpp"
#include "dfept/gnn.hpp"
#include "dfept/readout.hpp"

namespace dfept {

/// Code-sequence vector produced outside this toolkit for one function.
struct SequenceEmbedding {
  std::string function_id;
  std::vector<float> vector;
  std::string source;
};

/// Two fully connected layers over [graph | sequence]: relu(z W1 + b1) W2 + b2.
template <class T>
struct FusionModel {
  Parameter<T> w1, b1, w2, b2;

  static FusionModel init(std::size_t input_width, std::size_t hidden, std::uint64_t seed) {
    if (input_width == 0 || hidden == 0) throw Error(ErrorKind::InvalidDimension, "zero classifier width");
    Rng rng(seed);
    FusionModel m;
    m.w1 = {"fusion.w1", glorot_uniform<T>(input_width, hidden, rng)};
    m.b1 = {"fusion.b1", Matrix<T>(1, hidden)};
    m.w2 = {"fusion.w2", glorot_uniform<T>(hidden, 2, rng)};
    m.b2 = {"fusion.b2", Matrix<T>(1, 2)};
    return m;
  }

  std::size_t input_width() const { return w1.value.rows(); }
  std::size_t hidden() const { return w1.value.cols(); }

  void validate() const {
    require_shape(b1.value, 1, hidden(), "fusion.b1");
    require_shape(w2.value, hidden(), 2, "fusion.w2");
    require_shape(b2.value, 1, 2, "fusion.b2");
  }
};

/// Graph part first, sequence part second.
template <class T>
std::vector<T> fuse(const GraphVector<T>& g, const std::vector<T>& sequence, std::size_t expected_sequence_width) {
  if (sequence.size() != expected_sequence_width)
    throw Error(ErrorKind::ShapeError, "sequence embedding width " + std::to_string(sequence.size()) +
                                           ", model expects " + std::to_string(expected_sequence_width));
  std::vector<T> out = g.values;
  out.insert(out.end(), sequence.begin(), sequence.end());
  return out;
}

template <class T>
Var<T> classifier_logits(Var<T> fused, FusionModel<T>& m, bool trainable = true) {
  m.validate();
  if (fused.cols() != m.input_width())
    throw Error(ErrorKind::ShapeError, "classifier input width " + std::to_string(fused.cols()) + ", expects " +
                                           std::to_string(m.input_width()));
  Tape<T>& t = *fused.tape;
  Var<T> hidden = ad::relu(ad::add_row(ad::matmul(fused, t.parameter(m.w1, trainable)), t.parameter(m.b1, trainable)));
  return ad::add_row(ad::matmul(hidden, t.parameter(m.w2, trainable)), t.parameter(m.b2, trainable));
}

template <class T>
struct Prediction {
  std::array<T, 2> logits{};
  std::array<T, 2> probabilities{};
  int label = 0;
};

template <class T>
std::array<T, 2> softmax2(const std::array<T, 2>& z) {
  const T m = std::max(z[0], z[1]);
  const T e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

/// Argmax with exact ties going to class 0.
template <class T>
int predicted_label(const std::array<T, 2>& probabilities) {
  return probabilities[1] > probabilities[0] ? 1 : 0;
}

template <class T>
Prediction<T> forward(FusionModel<T>& m, const std::vector<T>& fused) {
  Tape<T> t;
  Var<T> logits = classifier_logits(t.constant(Matrix<T>::row_vector(fused)), m, false);
  Prediction<T> p;
  p.logits = {logits.value()(0, 0), logits.value()(0, 1)};
  p.probabilities = softmax2(p.logits);
  p.label = predicted_label(p.probabilities);
  return p;
}

/// Cross-entropy of the true class in log-sum-exp form.
template <class T>
T loss(const std::array<T, 2>& logits, int label) {
  if (label != 0 && label != 1) throw Error(ErrorKind::ContractViolation, "label must be 0 or 1");
  const T m = std::max(logits[0], logits[1]);
  return m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m)) - logits[static_cast<std::size_t>(label)];
}

/// Where sequence embeddings come from: a JSONL file, all zeros, or seeded noise.
struct SequencePolicy {
  enum class Kind { File, Zero, Random } kind = Kind::Zero;
  std::filesystem::path path;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
};

/// "zero", "random:SEED", or a path to a JSONL file.
SequencePolicy parse_sequence_policy(const std::string& spec, std::size_t default_dim);

/// Lines {"id": ..., "vector": [...]} with a constant width.
std::map<std::string, SequenceEmbedding> load_sequence_embeddings(const std::filesystem::path& path);

/// Resolve one embedding per id in order. Throws DataError for ids missing from a file.
std::vector<SequenceEmbedding> resolve_sequence_embeddings(const SequencePolicy& policy,
                                                           const std::vector<std::string>& ids);

}  // namespace dfept
