#include <sstream>
#include <stdexcept>

#include "cmlab/cli/commands.hpp"
#include "cmlab/tasks/classify.hpp"
#include "cmlab/util/errors.hpp"
#include "cmlab/util/fsio.hpp"
#include "cmlab/util/rng.hpp"
#include "common.hpp"

namespace cmlab::cli {

using model::TaskKind;
using namespace detail;

namespace {

std::string checkpoint_name(TaskKind task) {
  switch (task) {
    case TaskKind::LanguageModel: return "lm_checkpoint.json";
    case TaskKind::Classifier: return "sa_checkpoint.json";
    case TaskKind::Translation: return "mt_checkpoint.json";
  }
  return "checkpoint.json";
}

void train_command(const RunContext& ctx, TaskKind task) {
  if (task == TaskKind::Classifier)
    check_keys(ctx.config,
               {"seed", "train_corpus", "lexicon", "overlap_policy", "cmi_weights", "model", "train", "word2vec",
                "labels", "validation_share"},
               ctx.command);
  else
    check_keys(ctx.config,
               {"seed", "train_corpus", "lexicon", "overlap_policy", "cmi_weights", "model", "train", "word2vec"},
               ctx.command);
  ctx.input_path("train_corpus", true);
  const auto spec = model_spec(ctx, task);
  const auto cfg = train_config(ctx);
  const auto sgns = word2vec_config(ctx, spec.d_model);
  const auto weights = cmi_weights(ctx);
  const auto lex = lexicon(ctx);
  std::vector<std::string> labels;
  double validation_share = 0.0;
  if (task == TaskKind::Classifier) {
    labels = label_set(ctx);
    validation_share = get_or(ctx.config, "validation_share", 0.2, ctx.command);
    if (!(validation_share >= 0.0 && validation_share < 1.0))
      throw ConfigError(ctx.command + ": validation_share must lie in [0, 1)");
  }

  const auto data = load_corpus_key(ctx, "train_corpus", lex ? &*lex : nullptr, weights,
                                    lex ? corpus::MissingTags::Reject : corpus::MissingTags::Other);
  require_tags(spec, data, ctx.command);
  check_task_data(task, data, labels, ctx.command);
  std::vector<corpus::Utterance> train(data.begin(), data.end());
  std::vector<corpus::Utterance> validation;
  if (task == TaskKind::Classifier && validation_share > 0.0) {
    try {
      auto split = tasks::stratified_label_split(data, labels, validation_share, derive_seed(ctx.seed, "validation"));
      train = std::move(split.train);
      validation = std::move(split.validation);
    } catch (const std::invalid_argument& e) {
      throw DataError(ctx.command + ": " + e.what());
    }
  }

  const std::string ckpt = ctx.output_path(checkpoint_name(task));
  auto save = [&](const Trained& t) {
    model::save_checkpoint(ckpt, *t.model, &t.state, checkpoint_extras(ctx, t, labels));
  };
  Trained t;
  try {
    t = train_model(spec, train, labels, cfg, sgns, ctx.seed, save);
  } catch (const std::invalid_argument& e) {
    throw DataError(ctx.command + ": " + e.what());
  }
  save(t);

  json report = report_header(ctx);
  report["model"] = model::to_json(t.model->spec());
  report["parameters"] = t.model->params().parameter_count();
  report["train"] = tasks::to_json(cfg);
  report["examples"] = train.size();
  report["final_loss"] = t.log.empty() ? json(nullptr) : json(t.log.back().loss);
  report["checkpoint"] = checkpoint_name(task);
  if (task == TaskKind::Classifier) {
    report["validation_examples"] = validation.size();
    report["majority_label"] = t.majority_label;
    if (!validation.empty()) {
      report["validation"] = f1_json(evaluate_sa(*t.model, t.vocab, labels, validation), labels);
      std::vector<std::string> gold, majority(validation.size(), t.majority_label);
      for (const auto& u : validation) gold.push_back(*u.label);
      report["majority_baseline"] = f1_json(tasks::macro_f1(majority, gold, labels), labels);
    }
  }
  Outputs out;
  out.add("train_log.csv", train_log_csv(ctx, t.log));
  out.add("train_report.json", report.dump(2) + "\n");
  out.commit(ctx.out_dir);
}

std::vector<corpus::Utterance> eval_corpus(const RunContext& ctx, const model::ModelSpec& spec) {
  const auto weights = cmi_weights(ctx);
  const auto lex = lexicon(ctx);
  auto data = load_corpus_key(ctx, "eval_corpus", lex ? &*lex : nullptr, weights,
                              lex ? corpus::MissingTags::Reject : corpus::MissingTags::Other);
  require_tags(spec, data, ctx.command);
  return data;
}

}  // namespace

void cmd_train_lm(const RunContext& ctx) { train_command(ctx, TaskKind::LanguageModel); }
void cmd_train_sa(const RunContext& ctx) { train_command(ctx, TaskKind::Classifier); }
void cmd_train_mt(const RunContext& ctx) { train_command(ctx, TaskKind::Translation); }

void cmd_eval_ppl(const RunContext& ctx) {
  check_keys(ctx.config, {"seed", "checkpoint", "eval_corpus", "lexicon", "overlap_policy", "cmi_weights"},
             ctx.command);
  ctx.input_path("eval_corpus", true);
  auto task = load_task_checkpoint(ctx, TaskKind::LanguageModel);
  const auto data = eval_corpus(ctx, task.model->spec());
  const auto r = evaluate_lm(*task.model, task.vocab, data);

  json report = report_header(ctx);
  report["utterances"] = data.size();
  report["perplexity"] = perplexity_json(r);
  Outputs out;
  out.add("perplexity.csv", csv_preamble(ctx) + perplexity_csv(r));
  out.add("perplexity_report.json", report.dump(2) + "\n");
  out.commit(ctx.out_dir);
}

void cmd_eval_sa(const RunContext& ctx) {
  check_keys(ctx.config, {"seed", "checkpoint", "eval_corpus", "lexicon", "overlap_policy", "cmi_weights"},
             ctx.command);
  ctx.input_path("eval_corpus", true);
  auto task = load_task_checkpoint(ctx, TaskKind::Classifier);
  const auto data = eval_corpus(ctx, task.model->spec());
  check_task_data(TaskKind::Classifier, data, task.labels, ctx.command);
  std::vector<std::string> pred;
  const auto r = evaluate_sa(*task.model, task.vocab, task.labels, data, &pred);
  std::vector<std::string> gold, majority(data.size(), task.majority_label);
  for (const auto& u : data) gold.push_back(*u.label);
  const auto base = tasks::macro_f1(majority, gold, task.labels);

  json report = report_header(ctx);
  report["utterances"] = data.size();
  report["scores"] = f1_json(r, task.labels);
  report["majority_label"] = task.majority_label;
  report["majority_baseline"] = f1_json(base, task.labels);
  std::ostringstream scores;
  scores << csv_preamble(ctx) << "label,f1\n";
  for (std::size_t i = 0; i < task.labels.size(); ++i) scores << csv_field(task.labels[i]) << ',' << fixed(r.per_class[i]) << '\n';
  scores << "macro," << fixed(r.macro) << '\n' << "majority_baseline_macro," << fixed(base.macro) << '\n';
  std::ostringstream preds;
  preds << csv_preamble(ctx) << "index,gold,predicted\n";
  for (std::size_t i = 0; i < data.size(); ++i) preds << i << ',' << csv_field(gold[i]) << ',' << csv_field(pred[i]) << '\n';
  Outputs out;
  out.add("sa_scores.csv", scores.str());
  out.add("sa_predictions.csv", preds.str());
  out.add("sa_report.json", report.dump(2) + "\n");
  out.commit(ctx.out_dir);
}

void cmd_eval_mt(const RunContext& ctx) {
  check_keys(ctx.config,
             {"seed", "checkpoint", "eval_corpus", "lexicon", "overlap_policy", "cmi_weights", "max_len", "max_n",
              "smoothing", "beam_width"},
             ctx.command);
  ctx.input_path("eval_corpus", true);
  const std::size_t max_len = get_count(ctx.config, "max_len", 64, ctx.command);
  const std::size_t max_n = get_count(ctx.config, "max_n", 4, ctx.command);
  const bool smooth = get_or(ctx.config, "smoothing", true, ctx.command);
  const std::size_t beam = get_count(ctx.config, "beam_width", 1, ctx.command);
  if (max_len == 0 || max_n == 0 || beam == 0) throw ConfigError(ctx.command + ": max_len, max_n and beam_width must be positive");
  auto task = load_task_checkpoint(ctx, TaskKind::Translation);
  const auto data = eval_corpus(ctx, task.model->spec());
  check_task_data(TaskKind::Translation, data, {}, ctx.command);
  std::vector<std::vector<std::string>> hyps;
  const auto r = evaluate_mt(*task.model, task.vocab, data, max_len, beam, static_cast<int>(max_n), smooth, &hyps);

  json report = report_header(ctx);
  report["utterances"] = data.size();
  report["decoding"] = {{"beam_width", beam}, {"max_len", max_len}};
  report["scores"] = bleu_json(r);
  std::ostringstream csv, text;
  csv << csv_preamble(ctx) << "metric,value\nbleu," << fixed(r.score, 4) << '\n';
  for (std::size_t n = 0; n < r.precisions.size(); ++n) csv << "precision_" << n + 1 << ',' << fixed(r.precisions[n]) << '\n';
  csv << "brevity_penalty," << fixed(r.brevity_penalty) << '\n';
  for (const auto& h : hyps) {
    for (std::size_t i = 0; i < h.size(); ++i) text << (i ? " " : "") << h[i];
    text << '\n';
  }
  Outputs out;
  out.add("bleu.csv", csv.str());
  out.add("hypotheses.txt", text.str());
  out.add("bleu_report.json", report.dump(2) + "\n");
  out.commit(ctx.out_dir);
}

}  // namespace cmlab::cli
