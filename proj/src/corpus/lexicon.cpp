#include "cmlab/corpus/lexicon.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cmlab/corpus/text.hpp"
#include "cmlab/util/errors.hpp"

namespace cmlab::corpus {

std::string_view policy_name(OverlapPolicy policy) {
  switch (policy) {
    case OverlapPolicy::Other: return "other";
    case OverlapPolicy::PreferL1: return "prefer-l1";
    case OverlapPolicy::PreferL2: return "prefer-l2";
    case OverlapPolicy::FrequencyRatio: return "frequency-ratio";
  }
  return "other";
}

OverlapPolicy parse_policy(std::string_view name) {
  if (name == "other") return OverlapPolicy::Other;
  if (name == "prefer-l1") return OverlapPolicy::PreferL1;
  if (name == "prefer-l2") return OverlapPolicy::PreferL2;
  if (name == "frequency-ratio") return OverlapPolicy::FrequencyRatio;
  throw std::invalid_argument("unknown overlap policy '" + std::string(name) + "'");
}

void Lexicon::add(std::string_view word, LanguageTag lang, std::size_t count) {
  if (lang == LanguageTag::Other) throw std::invalid_argument("lexicon entries must be L1 or L2");
  auto& c = entries_[normalize_surface(word)];
  (lang == LanguageTag::L1 ? c.l1 : c.l2) += count;
}

bool Lexicon::contains(std::string_view normalized_word, LanguageTag lang) const {
  auto it = entries_.find(normalized_word);
  if (it == entries_.end()) return false;
  return lang == LanguageTag::L1 ? it->second.l1 > 0 : it->second.l2 > 0;
}

LanguageTag Lexicon::lookup(std::string_view normalized_word) const {
  auto it = entries_.find(normalized_word);
  if (it == entries_.end()) return LanguageTag::Other;
  const Counts& c = it->second;
  if (c.l1 > 0 && c.l2 == 0) return LanguageTag::L1;
  if (c.l2 > 0 && c.l1 == 0) return LanguageTag::L2;
  switch (policy_) {
    case OverlapPolicy::Other: return LanguageTag::Other;
    case OverlapPolicy::PreferL1: return LanguageTag::L1;
    case OverlapPolicy::PreferL2: return LanguageTag::L2;
    case OverlapPolicy::FrequencyRatio:
      if (c.l1 > c.l2) return LanguageTag::L1;
      if (c.l2 > c.l1) return LanguageTag::L2;
      return LanguageTag::Other;
  }
  return LanguageTag::Other;
}

void Lexicon::write_tsv(std::ostream& os) const {
  for (const auto& [word, c] : entries_) {
    if (c.l1) os << word << "\tL1\t" << c.l1 << '\n';
    if (c.l2) os << word << "\tL2\t" << c.l2 << '\n';
  }
}

Lexicon read_lexicon(std::istream& in, OverlapPolicy policy) {
  Lexicon lex(policy);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() < 2 || cols.size() > 3 || cols[0].empty())
      throw DataError("lexicon: expected word<TAB>lang[<TAB>count]", line_no);
    LanguageTag tag;
    if (cols[1] == "L1") {
      tag = LanguageTag::L1;
    } else if (cols[1] == "L2") {
      tag = LanguageTag::L2;
    } else {
      throw DataError("lexicon: language must be L1 or L2, got '" + cols[1] + "'", line_no);
    }
    std::size_t count = 1;
    if (cols.size() == 3) {
      try {
        std::size_t used = 0;
        count = std::stoul(cols[2], &used);
        if (used != cols[2].size() || count == 0) throw std::invalid_argument("count");
      } catch (const std::exception&) {
        throw DataError("lexicon: count must be a positive integer", line_no);
      }
    }
    try {
      if (contains_whitespace(cols[0])) throw std::invalid_argument("whitespace");
      lex.add(cols[0], tag, count);
    } catch (const std::invalid_argument&) {
      throw DataError("lexicon: malformed word '" + cols[0] + "'", line_no);
    }
  }
  return lex;
}

Lexicon load_lexicon(const std::string& path, OverlapPolicy policy) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon '" + path + "'");
  return read_lexicon(in, policy);
}

std::vector<Token> tag_tokens(const std::vector<std::string>& raw_tokens, const Lexicon& lexicon) {
  if (lexicon.empty()) throw std::invalid_argument("tag_tokens: lexicon is empty");
  std::vector<Token> out;
  out.reserve(raw_tokens.size());
  for (std::size_t i = 0; i < raw_tokens.size(); ++i) {
    const std::string& raw = raw_tokens[i];
    if (raw.empty() || contains_whitespace(raw))
      throw std::invalid_argument("tag_tokens: malformed token at position " + std::to_string(i));
    Token tok;
    tok.surface = normalize_surface(raw);
    tok.tag = has_letter(tok.surface) ? lexicon.lookup(tok.surface) : LanguageTag::Other;
    out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace cmlab::corpus
