#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmlab::corpus {

/// OTHER covers punctuation, digits, named entities and out-of-lexicon words.
enum class LanguageTag { L1, L2, Other };

std::string_view tag_name(LanguageTag tag);  // "L1", "L2", "O"
LanguageTag parse_tag(std::string_view name);

inline bool is_language(LanguageTag tag) { return tag != LanguageTag::Other; }

struct Token {
  std::string surface;  // normalized: lowercase NFC, non-empty, no whitespace
  LanguageTag tag = LanguageTag::Other;
};

/// Weights of the two CMI terms: the non-matrix-language fraction (w_m) and
/// the switching-point fraction (w_p). Must sum to one.
struct CmiWeights {
  double w_m = 0.5;
  double w_p = 0.5;

  void validate() const;
};

struct Utterance {
  std::vector<Token> tokens;
  std::vector<std::size_t> sp_indices;  // sorted
  std::vector<int> spi;                 // same length as tokens
  double cmi = 0.0;                     // [0, 100]
  std::optional<std::string> label;
  std::optional<std::string> target;

  std::size_t size() const { return tokens.size(); }
  std::vector<LanguageTag> tags() const;
  std::vector<std::string> surfaces() const;
};

/// Builds an utterance from tagged tokens and fills switching points, SPI and CMI.
Utterance make_utterance(std::vector<Token> tokens, const CmiWeights& weights = {});

}  // namespace cmlab::corpus
