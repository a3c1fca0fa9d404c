#include "cmlab/corpus/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "cmlab/corpus/codemix.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::corpus {

double HeapsFit::predict(double n) const { return K * std::pow(n, beta); }

HeapsFit fit_heaps(std::span<const HeapsSample> samples) {
  if (samples.size() < 3) throw std::invalid_argument("fit_heaps: need at least 3 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].n > 0) || !(samples[i].v > 0))
      throw std::invalid_argument("fit_heaps: samples must be positive");
    if (i > 0 && !(samples[i].n > samples[i - 1].n))
      throw std::invalid_argument("fit_heaps: n must be strictly increasing");
    if (i > 0 && samples[i].v < samples[i - 1].v)
      throw std::invalid_argument("fit_heaps: v must be nondecreasing");
  }
  const double m = static_cast<double>(samples.size());
  double mx = 0, my = 0;
  for (const auto& s : samples) {
    mx += std::log(s.n);
    my += std::log(s.v);
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (const auto& s : samples) {
    const double dx = std::log(s.n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(s.v) - my);
  }
  HeapsFit fit;
  fit.beta = sxy / sxx;
  const double log_k = my - fit.beta * mx;
  fit.K = std::exp(log_k);
  double ss = 0;
  for (const auto& s : samples) {
    const double r = std::log(s.v) - (log_k + fit.beta * std::log(s.n));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  if (!(fit.beta > 0.0 && fit.beta < 1.0))
    throw std::domain_error("fit_heaps: fitted exponent " + std::to_string(fit.beta) + " outside (0, 1)");
  return fit;
}

std::vector<HeapsSample> heaps_curve(std::span<const std::string> words, std::size_t points) {
  std::vector<HeapsSample> out;
  if (words.empty() || points == 0) return out;
  const double total = static_cast<double>(words.size());
  std::set<std::size_t> marks;
  for (std::size_t k = 1; k <= points; ++k) {
    const double n = std::pow(total, static_cast<double>(k) / static_cast<double>(points));
    marks.insert(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(n)), 1, words.size()));
  }
  std::unordered_set<std::string_view> seen;
  auto mark = marks.begin();
  for (std::size_t i = 0; i < words.size() && mark != marks.end(); ++i) {
    seen.insert(words[i]);
    if (i + 1 == *mark) {
      out.push_back({static_cast<double>(i + 1), static_cast<double>(seen.size())});
      ++mark;
    }
  }
  return out;
}

std::vector<std::string> corpus_words(std::span<const Utterance> corpus) {
  std::vector<std::string> out;
  for (const auto& u : corpus)
    for (const auto& t : u.tokens) out.push_back(t.surface);
  return out;
}

FrequencyTable word_frequencies(std::span<const std::string> words) {
  FrequencyTable f;
  for (const auto& w : words) ++f[w];
  return f;
}

std::vector<std::string> vocab_difference(const FrequencyTable& a, const FrequencyTable& b) {
  std::vector<std::pair<std::string, std::size_t>> keep;
  for (const auto& [w, c] : a)
    if (!b.contains(w)) keep.emplace_back(w, c);
  std::sort(keep.begin(), keep.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::vector<std::string> out;
  out.reserve(keep.size());
  for (auto& [w, c] : keep) out.push_back(std::move(w));
  return out;
}

CorpusSplit split_corpus(std::span<const Utterance> corpus, SplitRatio ratio, std::uint64_t seed) {
  if (ratio.train == 0) throw std::invalid_argument("split_corpus: train share must be positive");
  CorpusSplit out;
  std::array<std::vector<std::size_t>, kCmiBucketCount> members;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].cmi == 0.0) {
      ++out.discarded_zero;
      continue;
    }
    members[cmi_bucket(corpus[i].cmi)].push_back(i);
  }
  std::vector<char> is_test(corpus.size(), 0);
  const double test_share = static_cast<double>(ratio.test) / static_cast<double>(ratio.train + ratio.test);
  for (std::size_t b = 0; b < kCmiBucketCount; ++b) {
    auto& idx = members[b];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      out.warnings.push_back("bucket " + std::string(kCmiBucketLabels[b]) + " has " +
                             std::to_string(idx.size()) + " member(s); assigned to train");
      continue;
    }
    Rng rng(derive_seed(seed, "split", b));
    rng.shuffle(idx.begin(), idx.end());
    const auto n_test = static_cast<std::size_t>(std::llround(test_share * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < n_test; ++k) is_test[idx[k]] = 1;
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].cmi == 0.0) continue;
    (is_test[i] ? out.test : out.train).push_back(corpus[i]);
  }
  return out;
}

}  // namespace cmlab::corpus
