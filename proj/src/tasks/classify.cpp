#include "cmlab/tasks/classify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "cmlab/nn/ops.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::tasks {

int label_index(std::span<const std::string> labels, const std::string& label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::invalid_argument("label '" + label + "' is not in the declared label set");
  return static_cast<int>(it - labels.begin());
}

LabeledSplit stratified_label_split(std::span<const corpus::Utterance> data, std::span<const std::string> labels,
                                    double validation_share, std::uint64_t seed) {
  if (!(validation_share >= 0.0 && validation_share < 1.0))
    throw std::invalid_argument("validation_share must lie in [0, 1)");
  std::vector<std::vector<std::size_t>> by_label(labels.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].label) throw std::invalid_argument("utterance " + std::to_string(i) + " has no label");
    by_label[static_cast<std::size_t>(label_index(labels, *data[i].label))].push_back(i);
  }
  std::size_t present = 0;
  for (const auto& g : by_label) present += !g.empty();
  if (present < 2) throw std::invalid_argument("classification data must contain at least two classes");
  std::set<std::size_t> validation;
  for (std::size_t l = 0; l < labels.size(); ++l) {
    auto idx = by_label[l];
    Rng rng(derive_seed(seed, "label-split", l));
    rng.shuffle(idx.begin(), idx.end());
    const auto n_val = static_cast<std::size_t>(std::llround(validation_share * static_cast<double>(idx.size())));
    validation.insert(idx.begin(), idx.begin() + static_cast<long>(std::min(n_val, idx.size())));
  }
  LabeledSplit s;
  for (std::size_t i = 0; i < data.size(); ++i) (validation.count(i) ? s.validation : s.train).push_back(data[i]);
  return s;
}

ExampleLoss classifier_example_loss(model::Transformer& model, const Vocabularies& v,
                                    std::span<const std::string> labels, const corpus::Utterance& u,
                                    const model::ForwardContext& ctx) {
  if (!u.label) throw std::invalid_argument("classifier example without a label");
  const auto in = encode_utterance(u, v, false, model.spec().use_bigram_stream);
  const std::vector<int> target{label_index(labels, *u.label)};
  return {nn::cross_entropy_sum(model.class_logits(model.encode(in, ctx)), target), 1};
}

std::vector<TrainLogEntry> train_classifier(model::Transformer& model, const Vocabularies& v,
                                            std::span<const std::string> labels,
                                            std::span<const corpus::Utterance> train, const TrainConfig& cfg,
                                            std::uint64_t seed, model::TrainingState& state,
                                            const CheckpointHook& hook) {
  std::set<std::string> seen;
  for (const auto& u : train) {
    if (!u.label) throw std::invalid_argument("classifier example without a label");
    label_index(labels, *u.label);
    seen.insert(*u.label);
  }
  if (seen.size() < 2) throw std::invalid_argument("classification data must contain at least two classes");
  auto loss = [&](std::size_t i, const model::ForwardContext& ctx) {
    return classifier_example_loss(model, v, labels, train[i], ctx);
  };
  return train_loop(model, train.size(), loss, cfg, seed, state, hook);
}

std::string predict_label(model::Transformer& model, const Vocabularies& v, std::span<const std::string> labels,
                          const corpus::Utterance& u) {
  const auto in = encode_utterance(u, v, false, model.spec().use_bigram_stream);
  const auto logits = model.class_logits(model.encode(in, {})).value();
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.cols(); ++c)
    if (logits(0, c) > logits(0, best)) best = c;
  return labels[best];
}

std::string majority_label(std::span<const corpus::Utterance> train, std::span<const std::string> labels) {
  std::vector<std::size_t> counts(labels.size(), 0);
  for (const auto& u : train)
    if (u.label) ++counts[static_cast<std::size_t>(label_index(labels, *u.label))];
  return labels[static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin())];
}

}  // namespace cmlab::tasks
