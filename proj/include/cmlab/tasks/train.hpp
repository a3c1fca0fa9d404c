#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmlab/corpus/types.hpp"
#include "cmlab/model/checkpoint.hpp"
#include "cmlab/model/transformer.hpp"
#include "cmlab/tasks/encoding.hpp"

namespace cmlab::tasks {

/// lr(step) = lr_scale * d_model^-0.5 * min(step^-0.5, step * warmup^-1.5).
struct TrainConfig {
  std::size_t steps = 1500;
  std::size_t batch_size = 8;
  double lr_scale = 1.0;
  int warmup_steps = 200;
  std::size_t log_every = 50;
  /// In-memory snapshot interval; the snapshot is what gets written when
  /// training diverges. Also the interval of the checkpoint hook.
  std::size_t checkpoint_every = 100;

  void validate() const;
};

nlohmann::ordered_json to_json(const TrainConfig& c);
/// Unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);

struct TrainLogEntry {
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;  // mean per-token (or per-example) loss of the batch
};

/// Summed loss of one example and the count it is normalized by.
struct ExampleLoss {
  nn::Var loss;
  std::size_t count = 0;
};

using ExampleLossFn = std::function<ExampleLoss(std::size_t example, const model::ForwardContext& ctx)>;
/// Called with the training state whenever a checkpoint is due, and once
/// with the last good state before a divergence error propagates.
using CheckpointHook = std::function<void(const model::TrainingState&)>;

/// Mini-batch Adam over `n_examples`, visiting them in a fresh seed-derived
/// permutation each epoch. Resumes from `state` (step 0 starts fresh).
/// Throws NumericalError if the loss or a gradient becomes non-finite, after
/// restoring the last snapshot into the model and passing it to `hook`.
std::vector<TrainLogEntry> train_loop(model::Transformer& model, std::size_t n_examples, const ExampleLossFn& loss_fn,
                                      const TrainConfig& cfg, std::uint64_t seed, model::TrainingState& state,
                                      const CheckpointHook& hook = {});

/// Vocabularies from training utterances. Bigram surfaces include the <bos>
/// pair when `bos_bigrams`; target words are read from utterance targets.
Vocabularies build_vocabularies(std::span<const corpus::Utterance> corpus, bool bigrams, bool bos_bigrams,
                                bool targets);
nlohmann::ordered_json to_json(const Vocabularies& v);
Vocabularies vocabularies_from_json(const nlohmann::ordered_json& j);

}  // namespace cmlab::tasks
