#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cmlab/corpus/types.hpp"

namespace cmlab::corpus {

struct HeapsSample {
  double n = 0;  // running word count
  double v = 0;  // distinct words seen so far
};

/// V(n) = K * n^beta fitted by ordinary least squares on (log n, log v).
struct HeapsFit {
  double K = 0.0;
  double beta = 0.0;
  double residual = 0.0;  // RMS in log space

  double predict(double n) const;
};

/// Requires >= 3 samples, n strictly increasing, v nondecreasing, all
/// positive; throws std::invalid_argument otherwise. Throws
/// std::domain_error if the fitted exponent falls outside (0, 1).
HeapsFit fit_heaps(std::span<const HeapsSample> samples);

/// Vocabulary growth over a token stream, sampled at up to `points`
/// log-spaced word counts (the last sample is always the full stream).
std::vector<HeapsSample> heaps_curve(std::span<const std::string> words, std::size_t points);

/// Flattens a corpus into its surface forms in order.
std::vector<std::string> corpus_words(std::span<const Utterance> corpus);

using FrequencyTable = std::map<std::string, std::size_t>;

FrequencyTable word_frequencies(std::span<const std::string> words);

/// Words of `a` that never occur in `b`, by descending frequency in `a`;
/// ties are broken lexicographically.
std::vector<std::string> vocab_difference(const FrequencyTable& a, const FrequencyTable& b);

struct SplitRatio {
  std::size_t train = 4;
  std::size_t test = 1;
};

struct CorpusSplit {
  std::vector<Utterance> train;
  std::vector<Utterance> test;
  std::vector<std::string> warnings;
  std::size_t discarded_zero = 0;
};

/// Stratified split: each CMI bucket is shuffled with its own seed-derived
/// stream and cut at the ratio. Utterances with cmi == 0 are dropped.
/// Buckets with fewer than two members go to train with a warning. Both
/// outputs keep the original corpus order.
CorpusSplit split_corpus(std::span<const Utterance> corpus, SplitRatio ratio, std::uint64_t seed);

}  // namespace cmlab::corpus
