#include "cmlab/tasks/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cmlab/corpus/codemix.hpp"
#include "cmlab/util/errors.hpp"

namespace cmlab::tasks {

UniformScorer::UniformScorer(std::size_t vocab_size) {
  if (vocab_size == 0) throw std::invalid_argument("UniformScorer: empty vocabulary");
  nll_ = std::log(static_cast<double>(vocab_size));
}

std::vector<double> UniformScorer::token_nll(const corpus::Utterance& u) {
  return std::vector<double>(u.size() + 1, nll_);
}

PerplexityReport perplexity_report(TokenScorer& scorer, std::span<const corpus::Utterance> corpus) {
  if (corpus.empty()) throw std::invalid_argument("perplexity: empty evaluation corpus");
  constexpr std::size_t kAbove = corpus::kCmiBucketCount - 1;
  std::array<double, corpus::kCmiBucketCount> nll{};
  std::array<std::size_t, corpus::kCmiBucketCount> tokens{}, utterances{};
  for (const auto& u : corpus) {
    const auto scores = scorer.token_nll(u);
    const std::size_t b = corpus::cmi_bucket(u.cmi);
    for (double s : scores) {
      if (!std::isfinite(s)) throw NumericalError("perplexity: non-finite token score");
      nll[b] += s;
    }
    tokens[b] += scores.size();
    ++utterances[b];
  }
  PerplexityReport r;
  double weighted = 0, all_nll = 0;
  for (std::size_t b = 0; b < corpus::kCmiBucketCount; ++b) {
    all_nll += nll[b];
    r.total_tokens += tokens[b];
    if (tokens[b] == 0) {
      if (b != kAbove) r.omitted.emplace_back(corpus::kCmiBucketLabels[b]);
      continue;
    }
    PerplexityRow row{std::string(corpus::kCmiBucketLabels[b]), utterances[b], tokens[b],
                      std::exp(nll[b] / static_cast<double>(tokens[b]))};
    if (b == kAbove) {
      r.above_50 = row;
      continue;
    }
    weighted += row.perplexity * static_cast<double>(row.tokens);
    r.average_tokens += row.tokens;
    r.rows.push_back(std::move(row));
  }
  r.average = r.average_tokens ? weighted / static_cast<double>(r.average_tokens) : 0.0;
  r.overall = std::exp(all_nll / static_cast<double>(r.total_tokens));
  return r;
}

F1Result macro_f1(std::span<const std::string> predictions, std::span<const std::string> gold,
                  std::span<const std::string> labels) {
  if (predictions.size() != gold.size()) throw std::invalid_argument("macro_f1: prediction and gold lengths differ");
  if (labels.empty()) throw std::invalid_argument("macro_f1: empty label set");
  F1Result r;
  for (const auto& label : labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = predictions[i] == label, g = gold[i] == label;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
    double f1 = 0.0;
    if (tp + fp + fn == 0) r.absent_labels.push_back(label);
    else f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    r.per_class.push_back(f1);
    r.macro += f1;
  }
  r.macro /= static_cast<double>(labels.size());
  return r;
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& s, std::size_t n) {
  std::map<Ngram, std::size_t> c;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++c[Ngram(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(i + n))];
  return c;
}

}  // namespace

BleuResult bleu(const std::vector<std::vector<std::string>>& hypotheses,
                const std::vector<std::vector<std::string>>& references, int max_n, bool smooth) {
  if (hypotheses.empty()) throw std::invalid_argument("bleu: empty corpus");
  if (hypotheses.size() != references.size()) throw std::invalid_argument("bleu: hypothesis/reference count differs");
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be positive");
  BleuResult r;
  std::vector<std::size_t> matched(static_cast<std::size_t>(max_n), 0), total(static_cast<std::size_t>(max_n), 0);
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    r.hypothesis_length += hypotheses[s].size();
    r.reference_length += references[s].size();
    for (std::size_t n = 1; n <= static_cast<std::size_t>(max_n); ++n) {
      const auto h = ngram_counts(hypotheses[s], n);
      const auto ref = ngram_counts(references[s], n);
      for (const auto& [g, c] : h) {
        const auto it = ref.find(g);
        matched[n - 1] += std::min(c, it == ref.end() ? std::size_t{0} : it->second);
        total[n - 1] += c;
      }
    }
  }
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < static_cast<std::size_t>(max_n); ++n) {
    double p;
    if (matched[n] > 0) p = static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    else if (smooth) p = 1.0 / static_cast<double>(total[n] + 1);
    else p = 0.0;
    r.precisions.push_back(p);
    if (p == 0.0) zero = true;
    else log_sum += std::log(p);
  }
  if (r.hypothesis_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hypothesis_length < r.reference_length) {
    r.brevity_penalty =
        std::exp(1.0 - static_cast<double>(r.reference_length) / static_cast<double>(r.hypothesis_length));
  }
  r.score = zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / max_n);
  return r;
}

}  // namespace cmlab::tasks
