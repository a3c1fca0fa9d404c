#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmlab/cli/config.hpp"
#include "cmlab/model/checkpoint.hpp"
#include "cmlab/model/transformer.hpp"
#include "cmlab/tasks/metrics.hpp"
#include "cmlab/tasks/train.hpp"
#include "cmlab/tasks/word2vec.hpp"

namespace cmlab::cli::detail {

/// "model" section with the task forced by the command.
model::ModelSpec model_spec(const RunContext& ctx, model::TaskKind task);
tasks::TrainConfig train_config(const RunContext& ctx);
std::optional<tasks::SgnsConfig> word2vec_config(const RunContext& ctx, int d_model);
std::vector<std::string> label_set(const RunContext& ctx);

bool needs_sp_metadata(const model::ModelSpec& spec);
/// ConfigError when the positional encoding reads switching points but the
/// corpus carries no language tags.
void require_tags(const model::ModelSpec& spec, std::span<const corpus::Utterance> data, const std::string& where);
/// DataError for utterances without the label or target the task needs.
void check_task_data(model::TaskKind task, std::span<const corpus::Utterance> data, std::span<const std::string> labels,
                     const std::string& where);

struct Trained {
  std::unique_ptr<model::Transformer> model;
  tasks::Vocabularies vocab;
  std::vector<tasks::TrainLogEntry> log;
  model::TrainingState state;
  std::string majority_label;
};

/// Builds vocabularies and the model from `spec` (vocabulary sizes filled
/// in), optionally loads word2vec vectors, then trains.
Trained train_model(model::ModelSpec spec, std::span<const corpus::Utterance> train, std::span<const std::string> labels,
                    const tasks::TrainConfig& cfg, const std::optional<tasks::SgnsConfig>& sgns, std::uint64_t seed,
                    const std::function<void(const Trained&)>& on_checkpoint = {});

json checkpoint_extras(const RunContext& ctx, const Trained& t, std::span<const std::string> labels);

struct LoadedTask {
  std::unique_ptr<model::Transformer> model;
  tasks::Vocabularies vocab;
  std::vector<std::string> labels;
  std::string majority_label;
};
/// Reads "checkpoint" and checks that it holds a model of `task`.
LoadedTask load_task_checkpoint(const RunContext& ctx, model::TaskKind task);

tasks::PerplexityReport evaluate_lm(model::Transformer& m, const tasks::Vocabularies& v,
                                    std::span<const corpus::Utterance> data);
tasks::F1Result evaluate_sa(model::Transformer& m, const tasks::Vocabularies& v, std::span<const std::string> labels,
                            std::span<const corpus::Utterance> data, std::vector<std::string>* predictions = nullptr);
tasks::BleuResult evaluate_mt(model::Transformer& m, const tasks::Vocabularies& v,
                              std::span<const corpus::Utterance> data, std::size_t max_len, std::size_t beam_width,
                              int max_n, bool smooth, std::vector<std::vector<std::string>>* hypotheses = nullptr);

json perplexity_json(const tasks::PerplexityReport& r);
/// Rows 0-10 .. 41-50 (NA for empty ranges) and Average, then the 50+ and
/// whole-corpus rows flagged as outside the table.
std::string perplexity_csv(const tasks::PerplexityReport& r);
json f1_json(const tasks::F1Result& r, std::span<const std::string> labels);
json bleu_json(const tasks::BleuResult& r);
std::string train_log_csv(const RunContext& ctx, const std::vector<tasks::TrainLogEntry>& log);
std::string fixed(double v, int decimals = 6);

}  // namespace cmlab::cli::detail
