#include "common.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "cmlab/corpus/corpus_io.hpp"
#include "cmlab/tasks/classify.hpp"
#include "cmlab/tasks/encoding.hpp"
#include "cmlab/tasks/lm.hpp"
#include "cmlab/tasks/translate.hpp"
#include "cmlab/util/errors.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::cli::detail {

using model::TaskKind;

std::string fixed(double v, int decimals) { return corpus::format_fixed(v, decimals); }

model::ModelSpec model_spec(const RunContext& ctx, TaskKind task) {
  json j = ctx.config.value("model", json::object());
  if (!j.is_object()) throw ConfigError(ctx.command + ": 'model' must be an object");
  for (const char* derived : {"unigram_vocab", "bigram_vocab", "target_vocab", "n_classes"})
    if (j.contains(derived)) throw ConfigError(ctx.command + ": model." + derived + " is derived from the data");
  if (j.contains("task") && j["task"] != std::string(model::task_name(task)))
    throw ConfigError(ctx.command + ": model.task must be '" + std::string(model::task_name(task)) + "'");
  model::ModelSpec spec;
  try {
    spec = model::model_spec_from_json(j);
    spec.task = task;
    model::ModelSpec probe = spec;
    probe.unigram_vocab = probe.target_vocab = 8;
    probe.bigram_vocab = probe.use_bigram_stream ? 8 : 0;
    probe.n_classes = task == TaskKind::Classifier ? 2 : 0;
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ctx.command + ": " + e.what());
  }
  return spec;
}

tasks::TrainConfig train_config(const RunContext& ctx) {
  try {
    auto c = tasks::train_config_from_json(ctx.config.value("train", json::object()));
    c.validate();
    return c;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ctx.command + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(ctx.command + ": train: " + e.what());
  }
}

std::optional<tasks::SgnsConfig> word2vec_config(const RunContext& ctx, int d_model) {
  const auto it = ctx.config.find("word2vec");
  if (it == ctx.config.end()) return std::nullopt;
  json j = *it;
  if (j.is_object() && !j.contains("dims")) j["dims"] = d_model;
  try {
    auto c = tasks::sgns_config_from_json(j);
    if (c.dims != static_cast<std::size_t>(d_model))
      throw std::invalid_argument("word2vec.dims must equal model.d_model");
    return c;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ctx.command + ": " + e.what());
  }
}

std::vector<std::string> label_set(const RunContext& ctx) {
  auto labels = get_or<std::vector<std::string>>(ctx.config, "labels", tasks::kDefaultLabels, ctx.command);
  auto sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  if (labels.size() < 2 || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError(ctx.command + ": 'labels' needs at least two distinct labels");
  return labels;
}

bool needs_sp_metadata(const model::ModelSpec& spec) { return spec.pe.needs_spi() || spec.pe.needs_sign(); }

void require_tags(const model::ModelSpec& spec, std::span<const corpus::Utterance> data, const std::string& where) {
  if (needs_sp_metadata(spec) && !corpus::has_language_tags(data))
    throw ConfigError(where + ": " + std::string(posenc::variant_name(spec.pe.variant)) +
                      " needs switching points but the corpus has no language tags (supply tags or a lexicon)");
}

void check_task_data(TaskKind task, std::span<const corpus::Utterance> data, std::span<const std::string> labels,
                     const std::string& where) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& u = data[i];
    if (task == TaskKind::Classifier) {
      if (!u.label) throw DataError(where + ": utterance without a label", i + 1);
      if (std::find(labels.begin(), labels.end(), *u.label) == labels.end())
        throw DataError(where + ": label '" + *u.label + "' is not in the label set", i + 1);
    }
    if (task == TaskKind::Translation && (!u.target || u.target->find_first_not_of(" \t") == std::string::npos))
      throw DataError(where + ": utterance without a translation target", i + 1);
  }
}

Trained train_model(model::ModelSpec spec, std::span<const corpus::Utterance> train, std::span<const std::string> labels,
                    const tasks::TrainConfig& cfg, const std::optional<tasks::SgnsConfig>& sgns, std::uint64_t seed,
                    const std::function<void(const Trained&)>& on_checkpoint) {
  Trained t;
  const bool lm = spec.task == TaskKind::LanguageModel;
  t.vocab = tasks::build_vocabularies(train, spec.use_bigram_stream, lm, spec.task == TaskKind::Translation);
  spec.unigram_vocab = t.vocab.unigrams.size();
  spec.bigram_vocab = spec.use_bigram_stream ? t.vocab.bigrams.size() : 0;
  spec.target_vocab = spec.task == TaskKind::Translation ? t.vocab.targets.size() : 0;
  spec.n_classes = spec.task == TaskKind::Classifier ? labels.size() : 0;
  t.model = std::make_unique<model::Transformer>(spec, derive_seed(seed, "model"));
  if (sgns) {
    const auto pre = tasks::pretrain_embeddings(train, *sgns, derive_seed(seed, "word2vec"));
    tasks::load_embeddings(t.model->params().get("enc.emb").mutable_value(), t.vocab.unigrams, pre.unigrams);
    if (spec.use_bigram_stream)
      tasks::load_embeddings(t.model->params().get("bi.emb").mutable_value(), t.vocab.bigrams, pre.bigrams);
  }
  tasks::CheckpointHook hook;
  if (on_checkpoint)
    hook = [&](const model::TrainingState& s) {
      t.state = s;
      on_checkpoint(t);
    };
  model::TrainingState state;
  switch (spec.task) {
    case TaskKind::LanguageModel:
      t.log = tasks::train_lm(*t.model, t.vocab, train, cfg, seed, state, hook);
      break;
    case TaskKind::Classifier:
      t.majority_label = tasks::majority_label(train, labels);
      t.log = tasks::train_classifier(*t.model, t.vocab, labels, train, cfg, seed, state, hook);
      break;
    case TaskKind::Translation:
      t.log = tasks::train_mt(*t.model, t.vocab, train, cfg, seed, state, hook);
      break;
  }
  t.state = std::move(state);
  return t;
}

json checkpoint_extras(const RunContext& ctx, const Trained& t, std::span<const std::string> labels) {
  json j;
  j["command"] = ctx.command;
  j["config_hash"] = ctx.config_hash;
  j["seed"] = ctx.seed;
  j["vocabularies"] = tasks::to_json(t.vocab);
  j["labels"] = std::vector<std::string>(labels.begin(), labels.end());
  j["majority_label"] = t.majority_label;
  return j;
}

LoadedTask load_task_checkpoint(const RunContext& ctx, TaskKind task) {
  const auto path = ctx.input_path("checkpoint", true);
  auto loaded = model::load_checkpoint(*path);
  if (loaded.model->spec().task != task)
    throw ConfigError(ctx.command + ": checkpoint holds a '" + std::string(model::task_name(loaded.model->spec().task)) +
                      "' model, expected '" + std::string(model::task_name(task)) + "'");
  LoadedTask out;
  try {
    out.vocab = tasks::vocabularies_from_json(loaded.extras.at("vocabularies"));
    out.labels = loaded.extras.value("labels", std::vector<std::string>{});
    out.majority_label = loaded.extras.value("majority_label", std::string());
  } catch (const std::exception& e) {
    throw DataError(ctx.command + ": checkpoint task data: " + e.what());
  }
  out.model = std::move(loaded.model);
  return out;
}

tasks::PerplexityReport evaluate_lm(model::Transformer& m, const tasks::Vocabularies& v,
                                    std::span<const corpus::Utterance> data) {
  tasks::LMScorer scorer(m, v);
  return tasks::perplexity_report(scorer, data);
}

tasks::F1Result evaluate_sa(model::Transformer& m, const tasks::Vocabularies& v, std::span<const std::string> labels,
                            std::span<const corpus::Utterance> data, std::vector<std::string>* predictions) {
  std::vector<std::string> pred, gold;
  for (const auto& u : data) {
    pred.push_back(tasks::predict_label(m, v, labels, u));
    gold.push_back(*u.label);
  }
  if (predictions) *predictions = pred;
  return tasks::macro_f1(pred, gold, labels);
}

tasks::BleuResult evaluate_mt(model::Transformer& m, const tasks::Vocabularies& v,
                              std::span<const corpus::Utterance> data, std::size_t max_len, std::size_t beam_width,
                              int max_n, bool smooth, std::vector<std::vector<std::string>>* hypotheses) {
  std::vector<std::vector<std::string>> hyps, refs;
  for (const auto& u : data) {
    hyps.push_back(beam_width <= 1 ? tasks::greedy_decode(m, v, u, max_len) : tasks::beam_decode(m, v, u, max_len, beam_width));
    refs.push_back(tasks::target_tokens(u));
  }
  if (hypotheses) *hypotheses = hyps;
  return tasks::bleu(hyps, refs, max_n, smooth);
}

namespace {

json row_json(const tasks::PerplexityRow& r) {
  return {{"bucket", r.bucket}, {"utterances", r.utterances}, {"tokens", r.tokens}, {"perplexity", r.perplexity}};
}

const tasks::PerplexityRow* find_row(const tasks::PerplexityReport& r, std::string_view bucket) {
  for (const auto& row : r.rows)
    if (row.bucket == bucket) return &row;
  return nullptr;
}

}  // namespace

json perplexity_json(const tasks::PerplexityReport& r) {
  json j;
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back(row_json(row));
  j["rows"] = std::move(rows);
  j["average"] = r.average;
  j["average_tokens"] = r.average_tokens;
  j["omitted"] = r.omitted;
  j["above_50"] = r.above_50 ? row_json(*r.above_50) : json(nullptr);
  j["overall"] = r.overall;
  j["total_tokens"] = r.total_tokens;
  return j;
}

std::string perplexity_csv(const tasks::PerplexityReport& r) {
  std::ostringstream os;
  os << "bucket,utterances,tokens,perplexity,in_table\n";
  for (std::size_t b = 0; b + 1 < corpus::kCmiBucketCount; ++b) {
    const auto label = corpus::kCmiBucketLabels[b];
    if (const auto* row = find_row(r, label))
      os << label << ',' << row->utterances << ',' << row->tokens << ',' << fixed(row->perplexity, 4) << ",1\n";
    else
      os << label << ",0,0,NA,1\n";
  }
  os << "Average,," << r.average_tokens << ',' << fixed(r.average, 4) << ",1\n";
  if (r.above_50)
    os << "50+," << r.above_50->utterances << ',' << r.above_50->tokens << ',' << fixed(r.above_50->perplexity, 4)
       << ",0\n";
  os << "all,," << r.total_tokens << ',' << fixed(r.overall, 4) << ",0\n";
  return os.str();
}

json f1_json(const tasks::F1Result& r, std::span<const std::string> labels) {
  json per = json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) per[labels[i]] = r.per_class[i];
  return {{"macro_f1", r.macro}, {"per_class", per}, {"absent_labels", r.absent_labels}};
}

json bleu_json(const tasks::BleuResult& r) {
  return {{"bleu", r.score},
          {"precisions", r.precisions},
          {"brevity_penalty", r.brevity_penalty},
          {"hypothesis_length", r.hypothesis_length},
          {"reference_length", r.reference_length}};
}

std::string train_log_csv(const RunContext& ctx, const std::vector<tasks::TrainLogEntry>& log) {
  std::ostringstream os;
  os << csv_preamble(ctx) << "step,lr,loss\n";
  for (const auto& e : log) os << e.step << ',' << fixed(e.lr, 10) << ',' << fixed(e.loss, 6) << '\n';
  return os.str();
}

}  // namespace cmlab::cli::detail
