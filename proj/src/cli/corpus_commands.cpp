#include <sstream>
#include <stdexcept>

#include "cmlab/cli/commands.hpp"
#include "cmlab/corpus/codemix.hpp"
#include "cmlab/corpus/stats.hpp"
#include "cmlab/corpus/synth.hpp"
#include "cmlab/tasks/synthetic_tasks.hpp"
#include "cmlab/util/errors.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::cli {

namespace {

json histogram_json(const corpus::CmiHistogram& h) {
  json j;
  json rows = json::array();
  for (std::size_t b = 0; b < corpus::kCmiBucketCount; ++b)
    rows.push_back({{"bucket", std::string(corpus::kCmiBucketLabels[b])},
                    {"count", h.buckets[b]},
                    {"percent", h.percent(b)}});
  j["buckets"] = std::move(rows);
  j["mean_cmi"] = h.mean_cmi ? json(*h.mean_cmi) : json(nullptr);
  j["total"] = h.total;
  j["discarded_cmi0"] = h.discarded_zero;
  return j;
}

std::string histogram_csv(const RunContext& ctx, const corpus::CmiHistogram& h) {
  std::ostringstream os;
  os << csv_preamble(ctx);
  corpus::write_histogram_csv(os, h);
  return os.str();
}

std::string corpus_text(std::span<const corpus::Utterance> c) {
  std::ostringstream os;
  corpus::write_corpus(os, c);
  return os.str();
}

}  // namespace

void cmd_analyze(const RunContext& ctx) {
  check_keys(ctx.config,
             {"seed", "corpus", "lexicon", "overlap_policy", "cmi_weights", "heaps_points", "compare_corpus", "top_k"},
             ctx.command);
  const auto corpus_path = ctx.input_path("corpus", true);
  const auto compare_path = ctx.input_path("compare_corpus", false);
  const auto weights = cmi_weights(ctx);
  const auto lex = lexicon(ctx);
  const std::size_t points = get_count(ctx.config, "heaps_points", 50, ctx.command);
  const std::size_t top_k = get_count(ctx.config, "top_k", 100, ctx.command);
  if (points < 3) throw ConfigError("analyze: heaps_points must be at least 3");

  const auto corpus = load_corpus_key(ctx, "corpus", lex ? &*lex : nullptr, weights);
  const auto hist = corpus::bucket_cmi(corpus);
  const auto words = corpus::corpus_words(corpus);
  const auto samples = corpus::heaps_curve(words, points);

  Outputs out;
  json report = report_header(ctx);
  report["utterances"] = corpus.size();
  report["tokens"] = words.size();
  report["histogram"] = histogram_json(hist);
  std::ostringstream heaps;
  heaps << csv_preamble(ctx);
  try {
    const auto fit = corpus::fit_heaps(samples);
    report["heaps"] = {{"K", fit.K}, {"beta", fit.beta}, {"residual", fit.residual}, {"samples", samples.size()}};
    corpus::write_heaps_csv(heaps, fit, samples);
  } catch (const std::exception& e) {
    // Too few distinct counts or an exponent outside (0, 1): samples only.
    report["heaps"] = {{"error", e.what()}, {"samples", samples.size()}};
    heaps << "# fit=unavailable\nn,v\n";
    for (const auto& s : samples) heaps << corpus::format_fixed(s.n, 0) << ',' << corpus::format_fixed(s.v, 0) << '\n';
  }
  out.add("cmi_histogram.csv", histogram_csv(ctx, hist));
  out.add("heaps.csv", heaps.str());

  if (compare_path) {
    const auto other = load_corpus_key(ctx, "compare_corpus", lex ? &*lex : nullptr, weights);
    const auto a = corpus::word_frequencies(words);
    const auto b = corpus::word_frequencies(corpus::corpus_words(other));
    const auto diff = corpus::vocab_difference(a, b);
    std::ostringstream os;
    os << csv_preamble(ctx) << "word,count\n";
    for (std::size_t i = 0; i < std::min(top_k, diff.size()); ++i) os << csv_field(diff[i]) << ',' << a.at(diff[i]) << '\n';
    out.add("vocab_difference.csv", os.str());
    report["vocab_difference"] = {{"words", diff.size()}, {"listed", std::min(top_k, diff.size())}};
  }
  out.add("analyze_report.json", report.dump(2) + "\n");
  out.commit(ctx.out_dir);
}

void cmd_synth(const RunContext& ctx) {
  const std::string& where = ctx.command;
  check_keys(ctx.config,
             {"seed", "n_utterances", "min_len", "max_len", "target_mix", "sp_density", "vocab", "shared_fraction",
              "zipf_exponent", "cmi_weights", "labels", "translation", "split"},
             where);
  corpus::SynthSpec spec;
  spec.n_utterances = get_count(ctx.config, "n_utterances", spec.n_utterances, where);
  spec.min_len = get_count(ctx.config, "min_len", spec.min_len, where);
  spec.max_len = get_count(ctx.config, "max_len", spec.max_len, where);
  spec.sp_density = get_or(ctx.config, "sp_density", spec.sp_density, where);
  spec.shared_fraction = get_or(ctx.config, "shared_fraction", spec.shared_fraction, where);
  spec.zipf_exponent = get_or(ctx.config, "zipf_exponent", spec.zipf_exponent, where);
  spec.weights = cmi_weights(ctx);
  if (const auto it = ctx.config.find("target_mix"); it != ctx.config.end()) {
    if (it->is_string() && *it == "reference")
      spec.target_mix.assign(corpus::kReferenceCmiPercent.begin(), corpus::kReferenceCmiPercent.end());
    else
      spec.target_mix = get_required<std::vector<double>>(ctx.config, "target_mix", where);
  }

  json vocab = ctx.config.value("vocab", json::object());
  check_keys(vocab, {"l1", "l2", "post_sp", "shared", "word_width"}, "synth.vocab");
  const std::size_t width = get_count(vocab, "word_width", 3, "synth.vocab");
  try {
    spec.vocab_l1 = corpus::synthetic_words("h", get_count(vocab, "l1", 200, "synth.vocab"), width);
    spec.vocab_l2 = corpus::synthetic_words("e", get_count(vocab, "l2", 200, "synth.vocab"), width);
    const std::size_t post = get_count(vocab, "post_sp", 0, "synth.vocab");
    spec.post_sp_l1 = corpus::synthetic_words("hp", post, width);
    spec.post_sp_l2 = corpus::synthetic_words("ep", post, width);
    spec.shared = corpus::synthetic_words("s", get_count(vocab, "shared", 0, "synth.vocab"), width);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("synth.vocab: ") + e.what());
  }

  const auto labels = get_or<std::vector<std::string>>(ctx.config, "labels", {}, where);
  const auto translation = get_or<std::string>(ctx.config, "translation", "none", where);
  if (translation != "none" && translation != "rule" && translation != "copy")
    throw ConfigError("synth: translation must be one of none, rule, copy");
  std::optional<corpus::SplitRatio> ratio;
  if (const auto it = ctx.config.find("split"); it != ctx.config.end()) {
    check_keys(*it, {"train", "test"}, "synth.split");
    ratio = corpus::SplitRatio{get_count(*it, "train", 4, "synth.split"), get_count(*it, "test", 1, "synth.split")};
    if (ratio->train == 0 || ratio->test == 0) throw ConfigError("synth.split: both parts must be positive");
  }
  spec.validate();

  auto corpus = corpus::generate_synthetic_corpus(spec, derive_seed(ctx.seed, "synth"));
  if (!labels.empty()) tasks::attach_switch_cued_labels(corpus, labels);
  if (translation != "none") tasks::attach_translations(corpus, translation == "copy");

  Outputs out;
  const auto hist = corpus::bucket_cmi(corpus);
  json report = report_header(ctx);
  report["utterances"] = corpus.size();
  report["histogram"] = histogram_json(hist);
  if (!spec.target_mix.empty()) {
    const auto quotas = corpus::apportion(spec.n_utterances, spec.target_mix);
    report["target_quotas"] = quotas;
  }
  out.add("corpus.jsonl", corpus_text(corpus));
  std::ostringstream lex;
  corpus::synthetic_lexicon(spec).write_tsv(lex);
  out.add("lexicon.tsv", lex.str());
  out.add("cmi_histogram.csv", histogram_csv(ctx, hist));
  if (ratio) {
    const auto split = corpus::split_corpus(corpus, *ratio, derive_seed(ctx.seed, "split"));
    out.add("train.jsonl", corpus_text(split.train));
    out.add("test.jsonl", corpus_text(split.test));
    report["split"] = {{"train", split.train.size()},
                       {"test", split.test.size()},
                       {"discarded_cmi0", split.discarded_zero},
                       {"warnings", split.warnings}};
  }
  out.add("synth_report.json", report.dump(2) + "\n");
  out.commit(ctx.out_dir);
}

}  // namespace cmlab::cli
