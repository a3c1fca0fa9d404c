#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmlab/corpus/types.hpp"

namespace cmlab::tasks {

/// Anything that assigns a negative log-likelihood to each predicted token of
/// an utterance (its words followed by end-of-sequence).
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  virtual std::vector<double> token_nll(const corpus::Utterance& u) = 0;
};

/// Every token gets probability 1 / vocab_size.
class UniformScorer : public TokenScorer {
 public:
  explicit UniformScorer(std::size_t vocab_size);
  std::vector<double> token_nll(const corpus::Utterance& u) override;

 private:
  double nll_;
};

struct PerplexityRow {
  std::string bucket;
  std::size_t utterances = 0;
  std::size_t tokens = 0;
  double perplexity = 0.0;
};

/// Rows for the CMI ranges 0-10 through 41-50 in order (empty ranges are
/// omitted and listed in `omitted`), then the average: the token-weighted
/// mean of the row perplexities. Utterances above 50 are scored separately.
struct PerplexityReport {
  std::vector<PerplexityRow> rows;
  double average = 0.0;
  std::size_t average_tokens = 0;
  std::vector<std::string> omitted;
  std::optional<PerplexityRow> above_50;
  double overall = 0.0;  // exp(mean NLL) over every scored token
  std::size_t total_tokens = 0;
};

/// Throws std::invalid_argument for an empty corpus and NumericalError for
/// non-finite scores.
PerplexityReport perplexity_report(TokenScorer& scorer, std::span<const corpus::Utterance> corpus);

struct F1Result {
  double macro = 0.0;
  std::vector<double> per_class;           // declared label order
  std::vector<std::string> absent_labels;  // in neither gold nor predictions, scored 0
};

/// Unweighted mean of per-class F1 over the declared label set.
F1Result macro_f1(std::span<const std::string> predictions, std::span<const std::string> gold,
                  std::span<const std::string> labels);

struct BleuResult {
  double score = 0.0;  // [0, 100]
  std::vector<double> precisions;
  double brevity_penalty = 1.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
};

/// Corpus BLEU with clipped n-gram counts up to `max_n`. With `smooth`, an
/// order whose clipped count is zero uses (0 + 1) / (total + 1).
BleuResult bleu(const std::vector<std::vector<std::string>>& hypotheses,
                const std::vector<std::vector<std::string>>& references, int max_n = 4, bool smooth = true);

}  // namespace cmlab::tasks
