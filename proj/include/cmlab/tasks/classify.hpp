#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmlab/model/transformer.hpp"
#include "cmlab/tasks/encoding.hpp"
#include "cmlab/tasks/train.hpp"

namespace cmlab::tasks {

inline const std::vector<std::string> kDefaultLabels{"positive", "negative", "neutral"};

struct LabeledSplit {
  std::vector<corpus::Utterance> train;
  std::vector<corpus::Utterance> validation;
};

/// Per-label shuffle and cut: round(validation_share * n) of each label go to
/// validation. Throws std::invalid_argument if an utterance has no label or a
/// label outside `labels`, or if fewer than two labels occur.
LabeledSplit stratified_label_split(std::span<const corpus::Utterance> data, std::span<const std::string> labels,
                                    double validation_share, std::uint64_t seed);

int label_index(std::span<const std::string> labels, const std::string& label);

ExampleLoss classifier_example_loss(model::Transformer& model, const Vocabularies& v,
                                    std::span<const std::string> labels, const corpus::Utterance& u,
                                    const model::ForwardContext& ctx);

std::vector<TrainLogEntry> train_classifier(model::Transformer& model, const Vocabularies& v,
                                            std::span<const std::string> labels,
                                            std::span<const corpus::Utterance> train, const TrainConfig& cfg,
                                            std::uint64_t seed, model::TrainingState& state,
                                            const CheckpointHook& hook = {});

/// Argmax of the class logits.
std::string predict_label(model::Transformer& model, const Vocabularies& v, std::span<const std::string> labels,
                          const corpus::Utterance& u);

/// The most frequent training label, ties to the earlier declared label.
std::string majority_label(std::span<const corpus::Utterance> train, std::span<const std::string> labels);

}  // namespace cmlab::tasks
