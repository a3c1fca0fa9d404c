#include "cmlab/corpus/codemix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cmlab::corpus {

std::string_view tag_name(LanguageTag tag) {
  switch (tag) {
    case LanguageTag::L1: return "L1";
    case LanguageTag::L2: return "L2";
    case LanguageTag::Other: return "O";
  }
  return "O";
}

LanguageTag parse_tag(std::string_view name) {
  if (name == "L1") return LanguageTag::L1;
  if (name == "L2") return LanguageTag::L2;
  if (name == "O") return LanguageTag::Other;
  throw std::invalid_argument("unknown language tag '" + std::string(name) + "'");
}

void CmiWeights::validate() const {
  if (!(w_m >= 0.0) || !(w_p >= 0.0) || std::abs(w_m + w_p - 1.0) > 1e-9)
    throw std::invalid_argument("CMI weights must be nonnegative and sum to 1");
}

std::vector<LanguageTag> Utterance::tags() const {
  std::vector<LanguageTag> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.tag);
  return out;
}

std::vector<std::string> Utterance::surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::vector<std::size_t> detect_switching_points(std::span<const LanguageTag> tags) {
  std::vector<std::size_t> out;
  std::optional<LanguageTag> last;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!is_language(tags[i])) continue;
    if (last && *last != tags[i]) out.push_back(i);
    last = tags[i];
  }
  return out;
}

std::vector<std::size_t> detect_switching_points(std::span<const Token> tokens) {
  std::vector<LanguageTag> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(t.tag);
  return detect_switching_points(std::span<const LanguageTag>(tags));
}

std::vector<int> compute_spi(std::size_t n_tokens, std::span<const std::size_t> sp_indices) {
  for (std::size_t k = 0; k < sp_indices.size(); ++k) {
    if (sp_indices[k] == 0 || sp_indices[k] >= n_tokens)
      throw std::invalid_argument("compute_spi: switching point out of range");
    if (k > 0 && sp_indices[k] <= sp_indices[k - 1])
      throw std::invalid_argument("compute_spi: switching points must be strictly increasing");
  }
  std::vector<int> spi(n_tokens, 0);
  std::size_t next = 0;
  for (std::size_t i = 1; i < n_tokens; ++i) {
    if (next < sp_indices.size() && sp_indices[next] == i) {
      spi[i] = 0;
      ++next;
    } else {
      spi[i] = spi[i - 1] + 1;
    }
  }
  return spi;
}

double compute_cmi(std::span<const LanguageTag> tags, std::size_t n_switches, const CmiWeights& weights) {
  weights.validate();
  std::size_t l1 = 0;
  std::size_t l2 = 0;
  for (LanguageTag t : tags) {
    if (t == LanguageTag::L1) ++l1;
    if (t == LanguageTag::L2) ++l2;
  }
  const std::size_t n = l1 + l2;
  if (n == 0) return 0.0;
  const double mixing = static_cast<double>(n - std::max(l1, l2));
  return 100.0 * (weights.w_m * mixing + weights.w_p * static_cast<double>(n_switches)) / static_cast<double>(n);
}

double compute_cmi(const Utterance& utterance, const CmiWeights& weights) {
  const auto tags = utterance.tags();
  return compute_cmi(tags, utterance.sp_indices.size(), weights);
}

Utterance make_utterance(std::vector<Token> tokens, const CmiWeights& weights) {
  Utterance u;
  u.tokens = std::move(tokens);
  const auto tags = u.tags();
  u.sp_indices = detect_switching_points(std::span<const LanguageTag>(tags));
  u.spi = compute_spi(u.tokens.size(), u.sp_indices);
  u.cmi = compute_cmi(tags, u.sp_indices.size(), weights);
  return u;
}

std::size_t cmi_bucket(double cmi) {
  if (cmi <= 10.0) return 0;
  if (cmi <= 20.0) return 1;
  if (cmi <= 30.0) return 2;
  if (cmi <= 40.0) return 3;
  if (cmi <= 50.0) return 4;
  return 5;
}

double CmiHistogram::percent(std::size_t bucket) const {
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(buckets.at(bucket)) / static_cast<double>(total);
}

CmiHistogram bucket_cmi(std::span<const Utterance> corpus) {
  CmiHistogram h;
  double sum = 0.0;
  for (const auto& u : corpus) {
    if (u.cmi == 0.0) {
      ++h.discarded_zero;
      continue;
    }
    ++h.buckets[cmi_bucket(u.cmi)];
    ++h.total;
    sum += u.cmi;
  }
  if (h.total > 0) h.mean_cmi = sum / static_cast<double>(h.total);
  return h;
}

}  // namespace cmlab::corpus
