#include <sstream>
#include <stdexcept>

#include "cmlab/cli/commands.hpp"
#include "cmlab/corpus/text.hpp"
#include "cmlab/tasks/encoding.hpp"
#include "cmlab/util/errors.hpp"
#include "common.hpp"

namespace cmlab::cli {

using model::TaskKind;
using namespace detail;

namespace {

corpus::Utterance parse_utterance(const RunContext& ctx, const corpus::Lexicon* lex, const corpus::CmiWeights& w) {
  const auto it = ctx.config.find("utterance");
  if (it == ctx.config.end()) throw_missing("utterance", ctx.command);
  json tokens = json::array();
  if (it->is_string()) {
    if (!lex) throw ConfigError(ctx.command + ": a plain-text utterance needs a lexicon to be tagged");
    for (const auto& word : corpus::split_whitespace(it->get<std::string>())) tokens.push_back({{"w", word}});
  } else if (it->is_array()) {
    tokens = *it;
  } else {
    throw_type_error("utterance", ctx.command);
  }
  std::istringstream line(json{{"tokens", tokens}}.dump() + "\n");
  auto parsed = corpus::read_corpus(line, lex, w);
  if (parsed.size() != 1) throw DataError(ctx.command + ": empty utterance");
  return parsed.front();
}

struct Traced {
  model::AttentionTrace trace;
  std::vector<bool> is_sp;  // per input position
  std::vector<std::string> labels;
};

Traced trace_utterance(model::Transformer& m, const tasks::Vocabularies& v, const corpus::Utterance& u) {
  const bool bos = m.spec().task == TaskKind::LanguageModel;
  const auto in = tasks::encode_utterance(u, v, bos, m.spec().use_bigram_stream);
  Traced t;
  model::ForwardContext ctx;
  ctx.trace = &t.trace;
  m.encode(in, ctx);
  if (bos) {
    t.is_sp.push_back(false);
    t.labels.push_back(v.unigrams.word(tasks::Vocab::kBos));
  }
  std::vector<bool> sp(u.size(), false);
  for (auto i : u.sp_indices) sp[i] = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    t.is_sp.push_back(sp[i]);
    t.labels.push_back(u.tokens[i].surface + (sp[i] ? "*" : ""));
  }
  return t;
}

/// Mean attention weight a column receives from the rows that can see it,
/// averaged separately over switching-point and other word columns.
std::pair<double, double> column_means(const nn::Tensor& a, const std::vector<bool>& is_sp, std::size_t first_word,
                                       bool causal) {
  double sp_sum = 0.0, other_sum = 0.0;
  std::size_t sp_n = 0, other_n = 0;
  const std::size_t n = a.rows();
  for (std::size_t j = first_word; j < n; ++j) {
    double mass = 0.0;
    for (std::size_t i = causal ? j : 0; i < n; ++i) mass += a(i, j);
    const double mean = mass / static_cast<double>(causal ? n - j : n);
    if (is_sp[j]) {
      sp_sum += mean;
      ++sp_n;
    } else {
      other_sum += mean;
      ++other_n;
    }
  }
  return {sp_n ? sp_sum / sp_n : -1.0, other_n ? other_sum / other_n : -1.0};
}

}  // namespace

void cmd_dump_attention(const RunContext& ctx) {
  check_keys(ctx.config,
             {"seed", "checkpoint", "utterance", "lexicon", "overlap_policy", "cmi_weights", "layer", "head",
              "stats_corpus", "stats_limit"},
             ctx.command);
  const auto stats_path = ctx.input_path("stats_corpus", false);
  const auto weights = cmi_weights(ctx);
  const auto lex = lexicon(ctx);
  const std::size_t layer = get_count(ctx.config, "layer", 0, ctx.command);
  const std::size_t head = get_count(ctx.config, "head", 0, ctx.command);
  const std::size_t limit = get_count(ctx.config, "stats_limit", 50, ctx.command);
  const auto u = parse_utterance(ctx, lex ? &*lex : nullptr, weights);

  const auto path = ctx.input_path("checkpoint", true);
  auto loaded = model::load_checkpoint(*path);
  auto& m = *loaded.model;
  tasks::Vocabularies vocab;
  try {
    vocab = tasks::vocabularies_from_json(loaded.extras.at("vocabularies"));
  } catch (const std::exception& e) {
    throw DataError(ctx.command + ": checkpoint task data: " + e.what());
  }
  const auto& spec = m.spec();
  if (layer >= static_cast<std::size_t>(spec.n_layers))
    throw ConfigError(ctx.command + ": layer " + std::to_string(layer) + " out of range (model has " +
                      std::to_string(spec.n_layers) + ")");
  if (head >= static_cast<std::size_t>(spec.n_heads))
    throw ConfigError(ctx.command + ": head " + std::to_string(head) + " out of range (model has " +
                      std::to_string(spec.n_heads) + ")");
  require_tags(spec, std::vector<corpus::Utterance>{u}, ctx.command);

  const auto t = trace_utterance(m, vocab, u);
  const auto& a = t.trace.layers.at(layer).at(head);
  std::ostringstream csv;
  csv << csv_preamble(ctx) << "# layer=" << layer << "\n# head=" << head << "\n# variant="
      << posenc::variant_name(spec.pe.variant) << "\nquery\\key";
  for (const auto& l : t.labels) csv << ',' << csv_field(l);
  csv << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    csv << csv_field(t.labels[i]);
    for (std::size_t j = 0; j < a.cols(); ++j) csv << ',' << fixed(a(i, j), 10);
    csv << '\n';
  }

  Outputs out;
  out.add("attention.csv", csv.str());
  if (stats_path) {
    auto data = corpus::load_corpus(*stats_path, lex ? &*lex : nullptr, weights);
    require_tags(spec, data, ctx.command);
    const bool causal = spec.causal_encoder();
    const std::size_t first_word = causal ? 1 : 0;
    double sel_sp = 0, sel_other = 0, all_sp = 0, all_other = 0;
    std::size_t used = 0, pairs = 0;
    for (const auto& s : data) {
      if (used == limit) break;
      if (s.sp_indices.empty() || s.sp_indices.size() == s.size()) continue;
      const auto ts = trace_utterance(m, vocab, s);
      const auto [sp_sel, other_sel] = column_means(ts.trace.layers[layer][head], ts.is_sp, first_word, causal);
      sel_sp += sp_sel;
      sel_other += other_sel;
      for (const auto& heads : ts.trace.layers)
        for (const auto& h : heads) {
          const auto [sp, other] = column_means(h, ts.is_sp, first_word, causal);
          all_sp += sp;
          all_other += other;
          ++pairs;
        }
      ++used;
    }
    if (used == 0) throw DataError(ctx.command + ": stats_corpus has no utterance with both switching and other words");
    json report = report_header(ctx);
    report["utterances"] = used;
    report["layer"] = layer;
    report["head"] = head;
    report["selected_head"] = {{"sp_columns", sel_sp / used}, {"other_columns", sel_other / used}};
    report["all_heads"] = {{"sp_columns", all_sp / pairs}, {"other_columns", all_other / pairs}};
    out.add("attention_stats.json", report.dump(2) + "\n");
  }
  out.commit(ctx.out_dir);
}

}  // namespace cmlab::cli
