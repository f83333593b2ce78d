#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dfept/ast.hpp"

namespace dfept {

struct Corpus {
  std::string name;
  std::vector<SourceFunction> samples;

  std::size_t size() const { return samples.size(); }
  /// Ids unique and every sample labelled 0/1.
  void validate() const;
};

/// One JSON object per line: "func" (string), "target" (0/1), optional "idx".
/// Missing idx becomes the 0-based line number. Blank lines are skipped.
Corpus load_jsonl(const std::filesystem::path& path);
Corpus parse_jsonl(std::istream& in, std::string name = {});

enum class SplitStrategy { Sequential, Shuffled };

/// Fixed 8:1:1 split.
struct SplitSpec {
  std::uint64_t seed = 0;
  SplitStrategy strategy = SplitStrategy::Shuffled;
};

struct SplitSizes {
  std::size_t train, valid, test;
};

/// floor(0.8 n) for training; the remainder is halved with the extra sample going to validation.
SplitSizes split_sizes(std::size_t n);

struct CorpusSplit {
  Corpus train, valid, test;
};

CorpusSplit split(const Corpus& corpus, const SplitSpec& spec);

/// Externally supplied id lists {"train": [...], "valid": [...], "test": [...]}.
struct SplitManifest {
  std::vector<std::string> train, valid, test;
};

SplitManifest load_split_manifest(const std::filesystem::path& path);
CorpusSplit apply_manifest(const Corpus& corpus, const SplitManifest& manifest);

struct MetricsReport {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
};

/// Positive class is 1. Precision, recall and F1 fall back to 0 when their denominators vanish.
MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels);

std::string metrics_json(const MetricsReport& m);
/// Aligned two-column text table.
std::string metrics_table(const MetricsReport& m);

}  // namespace dfept
