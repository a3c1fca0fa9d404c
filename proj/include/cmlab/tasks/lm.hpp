#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmlab/model/transformer.hpp"
#include "cmlab/tasks/encoding.hpp"
#include "cmlab/tasks/metrics.hpp"
#include "cmlab/tasks/train.hpp"

namespace cmlab::tasks {

/// Causal next-token loss of one utterance: <bos>-prefixed input, targets
/// are the words followed by <eos>.
ExampleLoss lm_example_loss(model::Transformer& model, const Vocabularies& v, const corpus::Utterance& u,
                            const model::ForwardContext& ctx);

std::vector<TrainLogEntry> train_lm(model::Transformer& model, const Vocabularies& v,
                                    std::span<const corpus::Utterance> train, const TrainConfig& cfg,
                                    std::uint64_t seed, model::TrainingState& state, const CheckpointHook& hook = {});

/// Scores tokens with a trained language model in evaluation mode.
class LMScorer : public TokenScorer {
 public:
  LMScorer(model::Transformer& model, const Vocabularies& v) : model_(model), vocab_(v) {}
  std::vector<double> token_nll(const corpus::Utterance& u) override;

 private:
  model::Transformer& model_;
  const Vocabularies& vocab_;
};

}  // namespace cmlab::tasks
