#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dfept/dataset.hpp"
#include "dfept/model.hpp"

namespace dfept::testing {

/// Balanced corpus of small C functions. Label 1 functions let a NULL constant
/// reach a later use of a pointer; label 0 functions never do, though some
/// assign NULL to a pointer that is overwritten or never read.
Corpus synthetic_corpus(std::size_t per_class, std::uint64_t seed);

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

/// Graphs, a seeded table over their type tokens, and zero-sequence samples.
struct PreparedCorpus {
  EmbeddingTable table;
  std::vector<GraphSample> samples;
};

PreparedCorpus prepare(const Corpus& corpus, std::size_t dim, std::size_t seq_dim, AdjacencyMode mode,
                       std::uint64_t seed);

}  // namespace dfept::testing
