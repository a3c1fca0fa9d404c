#include "cmlab/corpus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cmlab/corpus/codemix.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::corpus {

std::vector<std::string> synthetic_words(std::string_view prefix, std::size_t count, std::size_t width) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string w(prefix);
    std::string suffix(width, 'a');
    std::size_t v = i;
    for (std::size_t k = width; k-- > 0;) {
      suffix[k] = static_cast<char>('a' + v % 26);
      v /= 26;
    }
    if (v != 0) throw std::invalid_argument("synthetic_words: width too small for count");
    out.push_back(w + suffix);
  }
  return out;
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0)) throw std::invalid_argument("apportion: weights must have positive sum");
  std::vector<std::size_t> out(weights.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    used += out[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++out[rem[k % rem.size()].second];
  return out;
}

void SynthSpec::validate() const {
  if (min_len == 0 || min_len > max_len) throw std::invalid_argument("synth: need 0 < min_len <= max_len");
  if (!(sp_density >= 0.0 && sp_density <= 1.0)) throw std::invalid_argument("synth: sp_density must lie in [0, 1]");
  if (!(shared_fraction >= 0.0 && shared_fraction < 1.0))
    throw std::invalid_argument("synth: shared_fraction must lie in [0, 1)");
  if (vocab_l1.empty() || vocab_l2.empty()) throw std::invalid_argument("synth: both vocabularies must be non-empty");
  if (shared_fraction > 0 && shared.empty()) throw std::invalid_argument("synth: shared_fraction > 0 needs shared words");
  std::set<std::string> l1(vocab_l1.begin(), vocab_l1.end());
  l1.insert(post_sp_l1.begin(), post_sp_l1.end());
  std::set<std::string> l2(vocab_l2.begin(), vocab_l2.end());
  l2.insert(post_sp_l2.begin(), post_sp_l2.end());
  for (const auto& w : l1)
    if (l2.contains(w)) throw std::invalid_argument("synth: vocabularies are not disjoint ('" + w + "')");
  for (const auto& w : shared)
    if (l1.contains(w) || l2.contains(w))
      throw std::invalid_argument("synth: shared word '" + w + "' also listed in a language vocabulary");
  if (target_mix.empty()) return;
  if (target_mix.size() != kCmiBucketCount) throw std::invalid_argument("synth: target_mix needs six bucket weights");
  for (double w : target_mix)
    if (!(w >= 0)) throw std::invalid_argument("synth: target_mix weights must be nonnegative");
  if (sp_density == 0.0)
    throw std::invalid_argument(
        "synth: infeasible spec: a target CMI mix needs switching, but sp_density 0 makes every utterance "
        "monolingual (CMI 0)");
  if (sp_density == 1.0) {
    // Strict alternation fixes the CMI for each length; every requested bucket must be reachable.
    std::set<std::size_t> reachable;
    for (std::size_t n = std::max<std::size_t>(min_len, 2); n <= max_len; ++n) {
      std::vector<LanguageTag> tags(n);
      for (std::size_t i = 0; i < n; ++i) tags[i] = i % 2 ? LanguageTag::L2 : LanguageTag::L1;
      reachable.insert(cmi_bucket(compute_cmi(tags, n - 1, weights)));
    }
    for (std::size_t b = 0; b < kCmiBucketCount; ++b)
      if (target_mix[b] > 0 && !reachable.contains(b))
        throw std::invalid_argument("synth: infeasible spec: sp_density 1 forces strict alternation, which never "
                                    "lands in CMI bucket " + std::string(kCmiBucketLabels[b]));
  }
}

namespace {

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double acc = 0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += std::pow(static_cast<double>(r + 1), -exponent);
      cdf_[r] = acc;
    }
    for (double& c : cdf_) c /= acc;
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

struct Vocab {
  const std::vector<std::string>* words;
  ZipfSampler sampler;
  Vocab(const std::vector<std::string>& w, double exponent) : words(&w), sampler(w.empty() ? 1 : w.size(), exponent) {}
  const std::string& draw(Rng& rng) const { return (*words)[sampler.draw(rng)]; }
};

}  // namespace

std::vector<Utterance> generate_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Vocab main_l1(spec.vocab_l1, spec.zipf_exponent);
  const Vocab main_l2(spec.vocab_l2, spec.zipf_exponent);
  const Vocab post_l1(spec.post_sp_l1, spec.zipf_exponent);
  const Vocab post_l2(spec.post_sp_l2, spec.zipf_exponent);
  const Vocab shared(spec.shared, spec.zipf_exponent);

  auto sample_one = [&](Rng& rng) {
    const std::size_t len = spec.min_len + rng.below(spec.max_len - spec.min_len + 1);
    std::vector<Token> tokens;
    tokens.reserve(len);
    LanguageTag lang = rng.bernoulli(0.5) ? LanguageTag::L1 : LanguageTag::L2;
    bool prev_switched = false;
    for (std::size_t i = 0; i < len; ++i) {
      bool switched = false;
      if (i > 0 && rng.bernoulli(spec.sp_density)) {
        lang = lang == LanguageTag::L1 ? LanguageTag::L2 : LanguageTag::L1;
        switched = true;
      }
      const bool l1 = lang == LanguageTag::L1;
      const Vocab& post = l1 ? post_l1 : post_l2;
      const std::string* word;
      if (prev_switched && !switched && !post.words->empty()) {
        word = &post.draw(rng);
      } else if (spec.shared_fraction > 0 && rng.bernoulli(spec.shared_fraction)) {
        word = &shared.draw(rng);
      } else {
        word = &(l1 ? main_l1 : main_l2).draw(rng);
      }
      tokens.push_back({*word, lang});
      prev_switched = switched;
    }
    return make_utterance(std::move(tokens), spec.weights);
  };

  std::vector<Utterance> out;
  out.reserve(spec.n_utterances);
  if (spec.target_mix.empty()) {
    Rng rng(derive_seed(seed, "synth"));
    for (std::size_t i = 0; i < spec.n_utterances; ++i) out.push_back(sample_one(rng));
    return out;
  }

  const auto quotas = apportion(spec.n_utterances, spec.target_mix);
  for (std::size_t b = 0; b < kCmiBucketCount; ++b) {
    Rng rng(derive_seed(seed, "synth-bucket", b));
    for (std::size_t k = 0; k < quotas[b]; ++k) {
      std::size_t attempts = 0;
      while (true) {
        Utterance u = sample_one(rng);
        if (u.cmi > 0.0 && cmi_bucket(u.cmi) == b) {
          out.push_back(std::move(u));
          break;
        }
        if (++attempts >= spec.max_attempts)
          throw std::invalid_argument("synth: infeasible spec: no utterance in CMI bucket " +
                                      std::string(kCmiBucketLabels[b]) + " after " + std::to_string(attempts) +
                                      " draws; adjust sp_density or the length range");
      }
    }
  }
  Rng order(derive_seed(seed, "synth-order"));
  order.shuffle(out.begin(), out.end());
  return out;
}

Lexicon synthetic_lexicon(const SynthSpec& spec) {
  Lexicon lex;
  for (const auto& w : spec.vocab_l1) lex.add(w, LanguageTag::L1);
  for (const auto& w : spec.post_sp_l1) lex.add(w, LanguageTag::L1);
  for (const auto& w : spec.vocab_l2) lex.add(w, LanguageTag::L2);
  for (const auto& w : spec.post_sp_l2) lex.add(w, LanguageTag::L2);
  for (const auto& w : spec.shared) {
    lex.add(w, LanguageTag::L1);
    lex.add(w, LanguageTag::L2);
  }
  return lex;
}

}  // namespace cmlab::corpus
