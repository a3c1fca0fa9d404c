#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmlab/corpus/types.hpp"
#include "cmlab/nn/tensor.hpp"
#include "cmlab/tasks/vocab.hpp"

namespace cmlab::tasks {

struct SgnsConfig {
  std::size_t dims = 48;
  std::size_t window = 2;
  std::size_t negative_samples = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of itself
  void validate() const;
};

nlohmann::ordered_json to_json(const SgnsConfig& c);
SgnsConfig sgns_config_from_json(const nlohmann::ordered_json& j);

/// (vocab + 1) x dims input vectors; the last row is the shared UNK vector
/// (the mean of the trained rows).
struct EmbeddingTable {
  std::vector<std::string> words;  // row order
  nn::Tensor vectors;
  std::vector<double> epoch_loss;  // mean SGNS loss per (center, context) pair
  std::size_t unk_row() const { return words.size(); }
  std::size_t row(std::string_view word) const;
  std::vector<double> vector(std::string_view word) const;
};

/// Skip-gram with negative sampling over token sequences. Negatives are
/// drawn from the unigram distribution raised to 0.75. Throws
/// std::invalid_argument if the vocabulary is smaller than negative_samples.
EmbeddingTable train_sgns(const std::vector<std::vector<std::string>>& sentences, const SgnsConfig& cfg,
                          std::uint64_t seed);

struct PretrainedEmbeddings {
  EmbeddingTable unigrams;
  EmbeddingTable bigrams;
};

/// Unigram tables over word surfaces and bigram tables over bigram surfaces.
PretrainedEmbeddings pretrain_embeddings(std::span<const corpus::Utterance> corpus, const SgnsConfig& cfg,
                                         std::uint64_t seed);

/// Copies table rows into an embedding matrix whose rows follow `vocab`.
/// <unk> takes the UNK row; other reserved ids keep their values. Throws
/// std::invalid_argument if the widths differ.
void load_embeddings(nn::Tensor& matrix, const Vocab& vocab, const EmbeddingTable& table);

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace cmlab::tasks
