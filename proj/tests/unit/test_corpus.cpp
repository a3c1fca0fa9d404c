#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "cmlab/corpus/codemix.hpp"
#include "cmlab/corpus/corpus_io.hpp"
#include "cmlab/corpus/lexicon.hpp"
#include "cmlab/corpus/stats.hpp"
#include "cmlab/corpus/synth.hpp"
#include "cmlab/corpus/text.hpp"
#include "cmlab/util/errors.hpp"
#include "cmlab/util/rng.hpp"

using namespace cmlab;
using namespace cmlab::corpus;

namespace {

constexpr auto L1 = LanguageTag::L1;
constexpr auto L2 = LanguageTag::L2;
constexpr auto O = LanguageTag::Other;

std::vector<Token> toks(std::initializer_list<LanguageTag> tags) {
  std::vector<Token> out;
  int i = 0;
  for (auto t : tags) out.push_back({"w" + std::to_string(i++), t});
  return out;
}

// Direct evaluation of the mixing formula, counting switches by scanning.
double cmi_oracle(const std::vector<LanguageTag>& tags, double wm, double wp) {
  double n1 = 0, n2 = 0, p = 0;
  int prev = -1;
  for (auto t : tags) {
    if (t == O) continue;
    (t == L1 ? n1 : n2) += 1;
    const int cur = t == L1 ? 1 : 2;
    if (prev != -1 && prev != cur) p += 1;
    prev = cur;
  }
  const double n = n1 + n2;
  if (n == 0) return 0;
  return 100.0 * (wm * (n - std::max(n1, n2)) + wp * p) / n;
}

Lexicon demo_lexicon() {
  Lexicon lex;
  lex.add("gaana", L1);
  lex.add("kare", L1);
  lex.add("ye", L1);
  lex.add("enjoy", L2);
  lex.add("hello", L2);
  lex.add("world", L2);
  lex.add("do", L1);
  lex.add("do", L2);
  return lex;
}

}  // namespace

TEST(Text, NormalizesCaseAndComposition) {
  EXPECT_EQ(normalize_surface("GaAnA"), "gaana");
  // e + combining acute composes to U+00E9.
  EXPECT_EQ(normalize_surface("Cafe\xCC\x81"), "caf\xC3\xA9");
  EXPECT_TRUE(has_letter("abc"));
  EXPECT_FALSE(has_letter("123!"));
  EXPECT_TRUE(contains_whitespace("a b"));
  EXPECT_EQ(split_whitespace("  a\tb  c "), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Lexicon, TagsExamples) {
  const auto lex = demo_lexicon();
  auto tags = [&](std::vector<std::string> raw) {
    std::vector<LanguageTag> out;
    for (const auto& t : tag_tokens(raw, lex)) out.push_back(t.tag);
    return out;
  };
  EXPECT_EQ(tags({"gaana", "enjoy", "kare"}), (std::vector<LanguageTag>{L1, L2, L1}));
  EXPECT_EQ(tags({"hello", "world"}), (std::vector<LanguageTag>{L2, L2}));
  EXPECT_EQ(tags({"do"}), (std::vector<LanguageTag>{O}));
  EXPECT_EQ(tags({"!!", "42", "zzz"}), (std::vector<LanguageTag>{O, O, O}));
  EXPECT_TRUE(tag_tokens({}, lex).empty());
}

TEST(Lexicon, OverlapPolicies) {
  Lexicon lex;
  lex.add("do", L1, 5);
  lex.add("do", L2, 2);
  lex.set_policy(OverlapPolicy::PreferL1);
  EXPECT_EQ(lex.lookup("do"), L1);
  lex.set_policy(OverlapPolicy::PreferL2);
  EXPECT_EQ(lex.lookup("do"), L2);
  lex.set_policy(OverlapPolicy::FrequencyRatio);
  EXPECT_EQ(lex.lookup("do"), L1);
  EXPECT_EQ(parse_policy("frequency-ratio"), OverlapPolicy::FrequencyRatio);
}

TEST(Lexicon, RejectsMalformedTokensAndEmptyLexicon) {
  const auto lex = demo_lexicon();
  try {
    tag_tokens({"ye", "bad token"}, lex);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("position 1"), std::string::npos);
  }
  EXPECT_THROW(tag_tokens({"ye"}, Lexicon{}), std::invalid_argument);
}

TEST(Lexicon, ReadsTsvAndReportsLine) {
  std::istringstream ok("# comment\nye\tL1\n\nenjoy\tL2\t3\n");
  const auto lex = read_lexicon(ok);
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.lookup("enjoy"), L2);
  std::istringstream bad("ye\tL1\nbroken\n");
  try {
    read_lexicon(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(SwitchingPoints, Examples) {
  using V = std::vector<std::size_t>;
  EXPECT_EQ(detect_switching_points(toks({L1, L2, L1})), (V{1, 2}));
  EXPECT_EQ(detect_switching_points(toks({L1, L1, L1, L1})), V{});
  EXPECT_EQ(detect_switching_points(toks({L1, L2, L1, L2})), (V{1, 2, 3}));
  EXPECT_EQ(detect_switching_points(toks({L1, O, O, L2, O, L2})), (V{3}));
}

TEST(SwitchingPoints, InvariantUnderOtherInsertion) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LanguageTag> base;
    const std::size_t n = 1 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i) base.push_back(rng.bernoulli(0.5) ? L1 : L2);
    std::vector<LanguageTag> padded;
    std::vector<std::size_t> index_map;
    for (auto t : base) {
      while (rng.bernoulli(0.3)) padded.push_back(O);
      index_map.push_back(padded.size());
      padded.push_back(t);
    }
    const auto sp_base = detect_switching_points(std::span<const LanguageTag>(base));
    const auto sp_pad = detect_switching_points(std::span<const LanguageTag>(padded));
    std::vector<std::size_t> mapped;
    for (auto i : sp_base) mapped.push_back(index_map[i]);
    EXPECT_EQ(sp_pad, mapped);
  }
}

TEST(Spi, Examples) {
  const auto u = make_utterance({{"ye", L1}, {"gaana", L1}, {"enjoy", L2}, {"kare", L1}});
  EXPECT_EQ(u.spi, (std::vector<int>{0, 1, 0, 0}));
  EXPECT_EQ(compute_spi(5, {}), (std::vector<int>{0, 1, 2, 3, 4}));
  const std::vector<std::size_t> sp{1, 2, 3};
  EXPECT_EQ(compute_spi(4, sp), (std::vector<int>{0, 0, 0, 0}));
  const std::vector<std::size_t> bad{4};
  EXPECT_THROW(compute_spi(4, bad), std::invalid_argument);
}

TEST(Spi, ZerosRecoverSwitchingPoints) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LanguageTag> tags;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) tags.push_back(rng.bernoulli(0.4) ? L1 : L2);
    const auto sp = detect_switching_points(std::span<const LanguageTag>(tags));
    const auto spi = compute_spi(n, sp);
    std::vector<std::size_t> zeros;
    for (std::size_t i = 1; i < n; ++i)
      if (spi[i] == 0) zeros.push_back(i);
    EXPECT_EQ(zeros, sp);
  }
}

TEST(Cmi, HandCases) {
  const CmiWeights half;
  auto cmi = [&](std::vector<LanguageTag> t, const CmiWeights& w) {
    const auto sp = detect_switching_points(std::span<const LanguageTag>(t));
    return compute_cmi(std::span<const LanguageTag>(t), sp.size(), w);
  };
  EXPECT_EQ(cmi({L1, L1, L1, L1, L1}, half), 0.0);
  EXPECT_EQ(cmi({L1, L2, L1}, half), 50.0);
  const CmiWeights ratio_only{1.0, 0.0};
  EXPECT_EQ(cmi({L1, L1, L2, L2}, ratio_only), 50.0);
  EXPECT_EQ(cmi({L1, L2, L1, L2}, ratio_only), 50.0);
  EXPECT_GT(cmi({L1, L2, L1, L2}, half), cmi({L1, L1, L2, L2}, half));
  EXPECT_EQ(cmi({O, O}, half), 0.0);
  EXPECT_THROW(cmi({L1}, CmiWeights{0.7, 0.7}), std::invalid_argument);
}

TEST(Cmi, MatchesOracleAndStaysInBounds) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<LanguageTag> tags;
    const std::size_t n = 1 + rng.below(15);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform();
      tags.push_back(u < 0.45 ? L1 : (u < 0.9 ? L2 : O));
    }
    const double wm = rng.uniform();
    const CmiWeights w{wm, 1.0 - wm};
    const auto sp = detect_switching_points(std::span<const LanguageTag>(tags));
    const double v = compute_cmi(std::span<const LanguageTag>(tags), sp.size(), w);
    EXPECT_NEAR(v, cmi_oracle(tags, w.w_m, w.w_p), 1e-9);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0);
  }
}

TEST(Cmi, MoreSwitchesNeverLowerScore) {
  Rng rng(5);
  const CmiWeights w{0.5, 0.5};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LanguageTag> a;
    const std::size_t n = 2 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i) a.push_back(rng.bernoulli(0.5) ? L1 : L2);
    auto b = a;
    rng.shuffle(b.begin(), b.end());
    const auto pa = detect_switching_points(std::span<const LanguageTag>(a)).size();
    const auto pb = detect_switching_points(std::span<const LanguageTag>(b)).size();
    const double ca = compute_cmi(std::span<const LanguageTag>(a), pa, w);
    const double cb = compute_cmi(std::span<const LanguageTag>(b), pb, w);
    if (pa > pb) { EXPECT_GE(ca, cb); }
    if (pb > pa) { EXPECT_GE(cb, ca); }
  }
}

TEST(Histogram, BucketsAndMean) {
  EXPECT_EQ(cmi_bucket(0.0), 0u);
  EXPECT_EQ(cmi_bucket(10.0), 0u);
  EXPECT_EQ(cmi_bucket(10.5), 1u);
  EXPECT_EQ(cmi_bucket(28.0), 2u);
  EXPECT_EQ(cmi_bucket(50.0), 4u);
  EXPECT_EQ(cmi_bucket(50.01), 5u);
  Utterance u;
  u.cmi = 28;
  const std::vector<Utterance> one{u};
  const auto h = bucket_cmi(one);
  EXPECT_EQ(h.buckets[2], 1u);
  EXPECT_EQ(h.total, 1u);
  ASSERT_TRUE(h.mean_cmi.has_value());
  EXPECT_EQ(*h.mean_cmi, 28.0);
  const auto empty = bucket_cmi({});
  EXPECT_FALSE(empty.mean_cmi.has_value());
  EXPECT_EQ(empty.total, 0u);
}

TEST(Heaps, NoiselessRecovery) {
  std::vector<HeapsSample> s;
  for (double n : {10.0, 100.0, 1000.0, 5000.0, 20000.0}) s.push_back({n, 10.0 * std::pow(n, 0.5)});
  const auto fit = fit_heaps(s);
  EXPECT_NEAR(fit.K, 10.0, 1e-9);
  EXPECT_NEAR(fit.beta, 0.5, 1e-12);
  EXPECT_LT(fit.residual, 1e-9);
}

TEST(Heaps, NoisyRecovery) {
  Rng rng(2024);
  std::vector<HeapsSample> s;
  double prev = 0;
  for (int i = 1; i <= 60; ++i) {
    const double n = std::pow(10.0, 1.0 + 4.0 * i / 60.0);
    double v = 40.0 * std::pow(n, 0.74) * (1.0 + 0.01 * rng.normal());
    v = std::max(v, prev);
    prev = v;
    s.push_back({n, v});
  }
  EXPECT_NEAR(fit_heaps(s).beta, 0.74, 0.02);
}

TEST(Heaps, RejectsBadSamples) {
  std::vector<HeapsSample> two{{1, 1}, {2, 2}};
  EXPECT_THROW(fit_heaps(two), std::invalid_argument);
  std::vector<HeapsSample> neg{{1, 1}, {2, 0}, {3, 2}};
  EXPECT_THROW(fit_heaps(neg), std::invalid_argument);
}

TEST(Heaps, CurveEndsAtFullStream) {
  std::vector<std::string> words{"a", "b", "a", "c", "b", "d", "e", "a"};
  const auto c = heaps_curve(words, 4);
  ASSERT_FALSE(c.empty());
  EXPECT_EQ(c.back().n, 8.0);
  EXPECT_EQ(c.back().v, 5.0);
}

TEST(VocabDifference, Examples) {
  EXPECT_EQ(vocab_difference({{"x", 3}, {"y", 1}}, {{"y", 5}}), std::vector<std::string>{"x"});
  EXPECT_EQ(vocab_difference({{"p", 2}, {"q", 2}}, {}), (std::vector<std::string>{"p", "q"}));
  EXPECT_EQ(vocab_difference({{"a", 1}, {"b", 4}}, {{"z", 1}}), (std::vector<std::string>{"b", "a"}));
}

TEST(Split, ExactDivisionAndPartition) {
  std::vector<Utterance> corpus;
  for (int i = 0; i < 10; ++i) {
    Utterance u;
    u.tokens = {{"w" + std::to_string(i), L1}};
    u.cmi = 25;
    corpus.push_back(u);
  }
  const auto s = split_corpus(corpus, {}, 1);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
  const auto again = split_corpus(corpus, {}, 1);
  for (std::size_t i = 0; i < s.test.size(); ++i) EXPECT_EQ(s.test[i].tokens[0].surface, again.test[i].tokens[0].surface);
}

TEST(Split, StratifiedOverSyntheticCorpus) {
  SynthSpec spec;
  spec.n_utterances = 500;
  spec.target_mix = {8.05, 18.9, 25.9, 26.0, 13.1, 8.05};
  spec.vocab_l1 = synthetic_words("h", 50);
  spec.vocab_l2 = synthetic_words("e", 50);
  auto corpus = generate_synthetic_corpus(spec, 9);
  Utterance mono;
  mono.tokens = {{"haaa", L1}};
  corpus.push_back(mono);
  const auto s = split_corpus(corpus, {}, 4);
  EXPECT_EQ(s.discarded_zero, 1u);
  EXPECT_EQ(s.train.size() + s.test.size(), corpus.size() - 1);
  std::multiset<std::string> seen;
  for (const auto* part : {&s.train, &s.test})
    for (const auto& u : *part) seen.insert(utterance_to_json_line(u));
  std::multiset<std::string> expected;
  for (const auto& u : corpus)
    if (u.cmi > 0) expected.insert(utterance_to_json_line(u));
  EXPECT_EQ(seen, expected);
  std::array<double, kCmiBucketCount> tr{}, te{};
  for (const auto& u : s.train) tr[cmi_bucket(u.cmi)] += 1;
  for (const auto& u : s.test) te[cmi_bucket(u.cmi)] += 1;
  for (std::size_t b = 0; b < kCmiBucketCount; ++b) {
    if (tr[b] + te[b] < 10) continue;
    EXPECT_NEAR(te[b] / (tr[b] + te[b]), 0.2, 0.5 / (tr[b] + te[b]) + 1e-12) << "bucket " << b;
  }
}

TEST(Split, SmallBucketGoesToTrainWithWarning) {
  Utterance u;
  u.tokens = {{"a", L1}};
  u.cmi = 60;
  const std::vector<Utterance> c{u};
  const auto s = split_corpus(c, {}, 0);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_EQ(s.warnings.size(), 1u);
}

TEST(Synth, ZeroDensityIsMonolingual) {
  SynthSpec spec;
  spec.sp_density = 0.0;
  spec.vocab_l1 = synthetic_words("h", 20);
  spec.vocab_l2 = synthetic_words("e", 20);
  for (const auto& u : generate_synthetic_corpus(spec, 1)) EXPECT_EQ(u.cmi, 0.0);
}

TEST(Synth, FullDensityAlternates) {
  SynthSpec spec;
  spec.sp_density = 1.0;
  spec.vocab_l1 = synthetic_words("h", 20);
  spec.vocab_l2 = synthetic_words("e", 20);
  for (const auto& u : generate_synthetic_corpus(spec, 1))
    for (std::size_t i = 1; i < u.size(); ++i) EXPECT_EQ(u.spi[i], 0);
}

TEST(Synth, TargetMixMatchesReference) {
  SynthSpec spec;
  spec.n_utterances = 100;
  spec.target_mix = std::vector<double>(kReferenceCmiPercent.begin(), kReferenceCmiPercent.end());
  spec.vocab_l1 = synthetic_words("h", 50);
  spec.vocab_l2 = synthetic_words("e", 50);
  const auto corpus = generate_synthetic_corpus(spec, 42);
  const auto h = bucket_cmi(corpus);
  for (std::size_t b = 0; b < kCmiBucketCount; ++b)
    EXPECT_NEAR(static_cast<double>(h.buckets[b]), kReferenceCmiPercent[b], 2.0) << kCmiBucketLabels[b];
  EXPECT_NEAR(*h.mean_cmi, kReferenceMeanCmi, 5.0);
}

TEST(Synth, DeterministicAndValidated) {
  SynthSpec spec;
  spec.vocab_l1 = synthetic_words("h", 10);
  spec.vocab_l2 = synthetic_words("e", 10);
  const auto a = generate_synthetic_corpus(spec, 5);
  const auto b = generate_synthetic_corpus(spec, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(utterance_to_json_line(a[i]), utterance_to_json_line(b[i]));

  auto infeasible = spec;
  infeasible.sp_density = 0.0;
  infeasible.target_mix = {0, 0, 0, 0, 0, 1};
  EXPECT_THROW(infeasible.validate(), std::invalid_argument);
  auto overlapping = spec;
  overlapping.vocab_l2 = spec.vocab_l1;
  EXPECT_THROW(overlapping.validate(), std::invalid_argument);
}

TEST(Synth, ApportionSumsToTotal) {
  const auto q = apportion(100, {8.05, 18.9, 25.9, 26.0, 13.1, 8.05});
  EXPECT_EQ(std::accumulate(q.begin(), q.end(), std::size_t{0}), 100u);
  EXPECT_EQ(q[3], 26u);
}

TEST(CorpusIo, RoundTripAndErrors) {
  const auto lex = demo_lexicon();
  std::istringstream in(
      "{\"tokens\":[{\"w\":\"Ye\"},{\"w\":\"gaana\"},{\"w\":\"enjoy\"},{\"w\":\"kare\",\"t\":\"L1\"}],\"label\":\"pos\"}\n\n");
  const auto c = read_corpus(in, &lex);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].spi, (std::vector<int>{0, 1, 0, 0}));
  EXPECT_EQ(c[0].tokens[0].surface, "ye");
  std::ostringstream out;
  write_corpus(out, c);
  std::istringstream back(out.str());
  const auto c2 = read_corpus(back);
  EXPECT_EQ(utterance_to_json_line(c2[0]), utterance_to_json_line(c[0]));

  std::istringstream untagged("{\"tokens\":[{\"w\":\"a\",\"t\":\"L1\"}]}\n{\"tokens\":[{\"w\":\"b\"}]}\n");
  try {
    read_corpus(untagged);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream untagged_other("{\"tokens\":[{\"w\":\"B\"}]}\n");
  const auto other = read_corpus(untagged_other, nullptr, {}, MissingTags::Other);
  EXPECT_EQ(other[0].tokens[0].tag, LanguageTag::Other);
  EXPECT_EQ(other[0].tokens[0].surface, "b");
  EXPECT_FALSE(has_language_tags(other));
  EXPECT_TRUE(has_language_tags(c));
  std::istringstream unknown("{\"tokens\":[{\"w\":\"a\",\"t\":\"L1\"}],\"extra\":1}\n");
  EXPECT_THROW(read_corpus(unknown), DataError);
}

TEST(CorpusIo, HistogramCsvLayout) {
  Utterance u;
  u.cmi = 28;
  const std::vector<Utterance> one{u};
  std::ostringstream os;
  write_histogram_csv(os, bucket_cmi(one));
  const std::string s = os.str();
  EXPECT_NE(s.find("bucket,count,percent\n"), std::string::npos);
  EXPECT_NE(s.find("21-30,1,100.00"), std::string::npos);
}
