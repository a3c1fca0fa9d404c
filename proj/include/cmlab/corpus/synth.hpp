#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cmlab/corpus/lexicon.hpp"
#include "cmlab/corpus/types.hpp"

namespace cmlab::corpus {

/// Alphabetic pseudo-words: prefix followed by `width` base-26 letters.
std::vector<std::string> synthetic_words(std::string_view prefix, std::size_t count, std::size_t width = 3);

struct SynthSpec {
  std::size_t n_utterances = 100;
  std::size_t min_len = 8;
  std::size_t max_len = 24;
  /// Relative weight per CMI bucket (six entries) or empty for an
  /// unconstrained chain. Bucket quotas are apportioned by largest remainder.
  std::vector<double> target_mix;
  /// Per-token probability that the language switches.
  double sp_density = 0.3;
  std::vector<std::string> vocab_l1;
  std::vector<std::string> vocab_l2;
  /// When non-empty, the token right after a switching point (if it does not
  /// switch again) is drawn from these instead of the main vocabularies.
  std::vector<std::string> post_sp_l1;
  std::vector<std::string> post_sp_l2;
  /// Surfaces shared by both languages; each token uses one with this probability.
  std::vector<std::string> shared;
  double shared_fraction = 0.0;
  /// Zipf exponent over vocabulary ranks; 0 draws uniformly.
  double zipf_exponent = 1.0;
  CmiWeights weights;
  std::size_t max_attempts = 200000;

  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

/// Markov-chain generator over the two languages. Deterministic given seed.
std::vector<Utterance> generate_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed);

/// Lexicon listing every synthetic word under its language (shared words under both).
Lexicon synthetic_lexicon(const SynthSpec& spec);

/// Largest-remainder apportionment of `total` items over `weights`.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights);

}  // namespace cmlab::corpus
