#include <chrono>
#include <sstream>
#include <stdexcept>

#include "cmlab/cli/commands.hpp"
#include "cmlab/util/errors.hpp"
#include "common.hpp"

namespace cmlab::cli {

using model::TaskKind;
using namespace detail;

namespace {

struct VariantSpec {
  posenc::Variant variant;
  bool bigram = false;
};

std::string variant_label(const VariantSpec& v) {
  return std::string(posenc::variant_name(v.variant)) + (v.bigram ? "+bigram" : "");
}

std::vector<VariantSpec> parse_variants(const RunContext& ctx) {
  const auto it = ctx.config.find("variants");
  if (it == ctx.config.end() || !it->is_array() || it->empty())
    throw ConfigError(ctx.command + ": 'variants' must be a non-empty array");
  std::vector<VariantSpec> out;
  for (const auto& v : *it) {
    VariantSpec s;
    try {
      if (v.is_string()) {
        s.variant = posenc::parse_variant(v.get<std::string>());
      } else {
        check_keys(v, {"variant", "bigram"}, "compare-pe.variants");
        s.variant = posenc::parse_variant(get_required<std::string>(v, "variant", "compare-pe.variants"));
        s.bigram = get_or(v, "bigram", false, "compare-pe.variants");
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ctx.command + ": " + e.what());
    }
    for (const auto& prev : out)
      if (prev.variant == s.variant && prev.bigram == s.bigram)
        throw ConfigError(ctx.command + ": variant listed twice: " + variant_label(s));
    out.push_back(s);
  }
  return out;
}

TaskKind parse_compare_task(const std::string& name) {
  if (name == "lm") return TaskKind::LanguageModel;
  if (name == "sa") return TaskKind::Classifier;
  if (name == "mt") return TaskKind::Translation;
  throw ConfigError("compare-pe: task must be one of lm, sa, mt");
}

std::string metric_name(TaskKind task) {
  switch (task) {
    case TaskKind::LanguageModel: return "perplexity";
    case TaskKind::Classifier: return "macro_f1";
    case TaskKind::Translation: return "bleu";
  }
  return "";
}

struct Row {
  VariantSpec v;
  std::uint64_t seed = 0;
  std::size_t parameters = 0;
  double value = 0.0;
  double delta = 0.0;
  json detail;
  double train_seconds = 0.0;
  double eval_seconds = 0.0;
};

}  // namespace

void cmd_compare_pe(const RunContext& ctx) {
  check_keys(ctx.config,
             {"seed", "task", "train_corpus", "eval_corpus", "lexicon", "overlap_policy", "cmi_weights", "variants",
              "seeds", "model", "train", "word2vec", "labels", "max_len", "max_n", "smoothing", "beam_width"},
             ctx.command);
  const TaskKind task = parse_compare_task(get_required<std::string>(ctx.config, "task", ctx.command));
  ctx.input_path("train_corpus", true);
  ctx.input_path("eval_corpus", true);
  const auto variants = parse_variants(ctx);
  const auto seeds = get_or<std::vector<std::uint64_t>>(ctx.config, "seeds", {ctx.seed}, ctx.command);
  if (seeds.empty()) throw ConfigError(ctx.command + ": 'seeds' must not be empty");
  if (ctx.config.contains("model") && ctx.config["model"].contains("pe") && ctx.config["model"]["pe"].contains("variant"))
    throw ConfigError(ctx.command + ": the variant comes from 'variants', not model.pe.variant");
  const auto base_spec = model_spec(ctx, task);
  const auto cfg = train_config(ctx);
  const auto sgns = word2vec_config(ctx, base_spec.d_model);
  const auto labels = task == TaskKind::Classifier ? label_set(ctx) : std::vector<std::string>{};
  const std::size_t max_len = get_count(ctx.config, "max_len", 64, ctx.command);
  const std::size_t max_n = get_count(ctx.config, "max_n", 4, ctx.command);
  const std::size_t beam = get_count(ctx.config, "beam_width", 1, ctx.command);
  const bool smooth = get_or(ctx.config, "smoothing", true, ctx.command);
  const auto weights = cmi_weights(ctx);
  const auto lex = lexicon(ctx);
  const auto missing = lex ? corpus::MissingTags::Reject : corpus::MissingTags::Other;
  const auto train = load_corpus_key(ctx, "train_corpus", lex ? &*lex : nullptr, weights, missing);
  const auto eval = load_corpus_key(ctx, "eval_corpus", lex ? &*lex : nullptr, weights, missing);

  std::vector<model::ModelSpec> specs;
  for (const auto& v : variants) {
    auto s = base_spec;
    s.pe.variant = v.variant;
    s.use_bigram_stream = v.bigram;
    require_tags(s, train, ctx.command);
    require_tags(s, eval, ctx.command);
    specs.push_back(s);
  }
  check_task_data(task, train, labels, ctx.command);
  check_task_data(task, eval, labels, ctx.command);

  using clock = std::chrono::steady_clock;
  std::vector<Row> rows;
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    for (const auto seed : seeds) {
      Row row;
      row.v = variants[vi];
      row.seed = seed;
      const auto t0 = clock::now();
      Trained t;
      try {
        t = train_model(specs[vi], train, labels, cfg, sgns, seed);
      } catch (const std::invalid_argument& e) {
        throw DataError(ctx.command + ": " + e.what());
      }
      const auto t1 = clock::now();
      row.parameters = t.model->params().parameter_count();
      switch (task) {
        case TaskKind::LanguageModel: {
          const auto r = evaluate_lm(*t.model, t.vocab, eval);
          row.value = r.overall;
          row.detail = perplexity_json(r);
          break;
        }
        case TaskKind::Classifier: {
          const auto r = evaluate_sa(*t.model, t.vocab, labels, eval);
          row.value = r.macro;
          row.detail = f1_json(r, labels);
          break;
        }
        case TaskKind::Translation: {
          const auto r = evaluate_mt(*t.model, t.vocab, eval, max_len, beam, static_cast<int>(max_n), smooth);
          row.value = r.score;
          row.detail = bleu_json(r);
          break;
        }
      }
      row.train_seconds = std::chrono::duration<double>(t1 - t0).count();
      row.eval_seconds = std::chrono::duration<double>(clock::now() - t1).count();
      rows.push_back(std::move(row));
    }
  }
  // Delta against the first declared variant trained with the same seed.
  for (auto& row : rows)
    for (const auto& ref : rows)
      if (ref.seed == row.seed) {
        row.delta = row.value - ref.value;
        break;
      }

  const std::string metric = metric_name(task);
  std::ostringstream csv, timings;
  csv << csv_preamble(ctx)
      << "variant,bigram,seed,sin_cos,index,dynamic,spi,relative,rm,sprm,parameters,metric,value,delta\n";
  timings << "variant,bigram,seed,train_seconds,eval_seconds\n";
  json report = report_header(ctx);
  report["task"] = metric;
  report["train"] = tasks::to_json(cfg);
  json jrows = json::array();
  for (const auto& row : rows) {
    const auto c = posenc::capabilities(row.v.variant);
    csv << posenc::variant_name(row.v.variant) << ',' << row.v.bigram << ',' << row.seed << ',' << c.sin_cos << ','
        << c.index << ',' << c.dynamic << ',' << c.spi << ',' << c.relative << ',' << c.rm << ',' << c.sprm << ','
        << row.parameters << ',' << metric << ',' << fixed(row.value, 4) << ',' << fixed(row.delta, 4) << '\n';
    timings << posenc::variant_name(row.v.variant) << ',' << row.v.bigram << ',' << row.seed << ','
            << fixed(row.train_seconds, 3) << ',' << fixed(row.eval_seconds, 3) << '\n';
    jrows.push_back({{"variant", variant_label(row.v)},
                     {"seed", row.seed},
                     {"parameters", row.parameters},
                     {metric, row.value},
                     {"delta", row.delta},
                     {"detail", row.detail}});
  }
  report["rows"] = std::move(jrows);
  json summary = json::array();
  for (const auto& v : variants) {
    double sum = 0.0, dsum = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows)
      if (row.v.variant == v.variant && row.v.bigram == v.bigram) {
        sum += row.value;
        dsum += row.delta;
        ++n;
      }
    summary.push_back({{"variant", variant_label(v)}, {"mean", sum / n}, {"mean_delta", dsum / n}, {"runs", n}});
  }
  report["summary"] = std::move(summary);

  Outputs out;
  out.add("compare_pe.csv", csv.str());
  out.add("compare_pe.json", report.dump(2) + "\n");
  out.add("compare_pe_timings.csv", timings.str());
  out.commit(ctx.out_dir);
}

}  // namespace cmlab::cli
