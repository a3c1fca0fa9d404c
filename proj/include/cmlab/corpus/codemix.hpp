#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cmlab/corpus/types.hpp"

namespace cmlab::corpus {

/// Positions i where the language differs from the closest preceding
/// language-bearing token. OTHER tokens are skipped, never compared.
std::vector<std::size_t> detect_switching_points(std::span<const Token> tokens);
std::vector<std::size_t> detect_switching_points(std::span<const LanguageTag> tags);

/// Switching-point indices: a per-token counter that starts at 0 and resets
/// to 0 at every switching point. Throws std::invalid_argument if
/// sp_indices is unsorted or out of range.
std::vector<int> compute_spi(std::size_t n_tokens, std::span<const std::size_t> sp_indices);

/// Code-mixing index in [0, 100]:
///   100 * (w_m * (N - max_i t_Li) + w_p * P) / N
/// with N counting L1/L2 tokens only and P the number of switching points.
/// Returns 0 when N is 0.
double compute_cmi(std::span<const LanguageTag> tags, std::size_t n_switches, const CmiWeights& weights);
double compute_cmi(const Utterance& utterance, const CmiWeights& weights);

inline constexpr std::size_t kCmiBucketCount = 6;
inline constexpr std::array<std::string_view, kCmiBucketCount> kCmiBucketLabels{
    "0-10", "11-20", "21-30", "31-40", "41-50", "50+"};
/// Share of each bucket (percent) in the reference tweet collection.
inline constexpr std::array<double, kCmiBucketCount> kReferenceCmiPercent{8.05, 18.9, 25.9, 26.0, 13.1, 8.05};
inline constexpr double kReferenceMeanCmi = 28.0;

/// Bucket index: [0,10] -> 0, (10,20] -> 1, ..., (40,50] -> 4, (50,100] -> 5.
std::size_t cmi_bucket(double cmi);

struct CmiHistogram {
  std::array<std::size_t, kCmiBucketCount> buckets{};
  std::optional<double> mean_cmi;  // empty when no utterance was bucketed
  std::size_t total = 0;           // sum of buckets
  std::size_t discarded_zero = 0;  // utterances with cmi == 0, not bucketed

  double percent(std::size_t bucket) const;
};

CmiHistogram bucket_cmi(std::span<const Utterance> corpus);

}  // namespace cmlab::corpus
