#pragma once

#include <cstddef>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cmlab/posenc/config.hpp"

namespace cmlab::model {

/// Output head and stack layout.
///   LanguageModel: causal encoder stack, next-token softmax over the unigram vocabulary.
///   Classifier:    bidirectional encoder, mean pooling, linear head over n_classes.
///   Translation:   encoder plus causal decoder with cross-attention, softmax over target_vocab.
enum class TaskKind { LanguageModel, Classifier, Translation };

std::string_view task_name(TaskKind t);  // "lm", "classifier", "translation"
TaskKind parse_task(std::string_view name);

struct ModelSpec {
  TaskKind task = TaskKind::LanguageModel;
  int n_layers = 2;
  int n_heads = 6;
  int d_model = 48;
  int d_ff = 96;
  double dropout_p = 0.2;
  posenc::PEConfig pe;
  std::size_t unigram_vocab = 0;
  std::size_t bigram_vocab = 0;
  std::size_t target_vocab = 0;
  std::size_t n_classes = 0;
  bool use_bigram_stream = false;
  bool tie_embeddings = false;

  int head_dim() const { return d_model / n_heads; }
  bool causal_encoder() const { return task == TaskKind::LanguageModel; }
  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// Keys mirror the field names; "pe" is a nested PEConfig object whose
/// d_model defaults to the model's. Unknown keys are rejected. The result is
/// not validated: vocabulary sizes are usually filled in from data later.
nlohmann::ordered_json to_json(const ModelSpec& s);
ModelSpec model_spec_from_json(const nlohmann::ordered_json& j);

}  // namespace cmlab::model
