#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cmlab/corpus/types.hpp"

namespace cmlab::corpus {

/// How a word listed under both languages is resolved.
enum class OverlapPolicy { Other, PreferL1, PreferL2, FrequencyRatio };

std::string_view policy_name(OverlapPolicy policy);
OverlapPolicy parse_policy(std::string_view name);

/// Word lists for the two languages. Words are stored normalized. Each entry
/// keeps a count so the frequency-ratio policy can break overlaps.
class Lexicon {
 public:
  explicit Lexicon(OverlapPolicy policy = OverlapPolicy::Other) : policy_(policy) {}

  void add(std::string_view word, LanguageTag lang, std::size_t count = 1);

  LanguageTag lookup(std::string_view normalized_word) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  OverlapPolicy policy() const { return policy_; }
  void set_policy(OverlapPolicy policy) { policy_ = policy; }

  bool contains(std::string_view normalized_word, LanguageTag lang) const;

  /// word<TAB>lang[<TAB>count] lines, sorted by word, L1 before L2.
  void write_tsv(std::ostream& os) const;

 private:
  struct Counts {
    std::size_t l1 = 0;
    std::size_t l2 = 0;
  };
  std::map<std::string, Counts, std::less<>> entries_;
  OverlapPolicy policy_;
};

/// Reads word<TAB>lang[<TAB>count]. Blank lines and lines starting with '#'
/// are skipped. Throws DataError with the line number on malformed input.
Lexicon read_lexicon(std::istream& in, OverlapPolicy policy = OverlapPolicy::Other);
Lexicon load_lexicon(const std::string& path, OverlapPolicy policy = OverlapPolicy::Other);

/// Tags raw tokens against the lexicon. Tokens are normalized first.
/// Throws std::invalid_argument naming the position for empty or
/// whitespace-containing tokens, and for an empty lexicon.
std::vector<Token> tag_tokens(const std::vector<std::string>& raw_tokens, const Lexicon& lexicon);

}  // namespace cmlab::corpus
