#include "cmlab/tasks/lm.hpp"

#include "cmlab/nn/ops.hpp"

namespace cmlab::tasks {

ExampleLoss lm_example_loss(model::Transformer& model, const Vocabularies& v, const corpus::Utterance& u,
                            const model::ForwardContext& ctx) {
  const auto in = encode_utterance(u, v, true, model.spec().use_bigram_stream);
  const auto targets = lm_targets(u, v.unigrams);
  return {nn::cross_entropy_sum(model.lm_logits(model.encode(in, ctx)), targets), targets.size()};
}

std::vector<TrainLogEntry> train_lm(model::Transformer& model, const Vocabularies& v,
                                    std::span<const corpus::Utterance> train, const TrainConfig& cfg,
                                    std::uint64_t seed, model::TrainingState& state, const CheckpointHook& hook) {
  auto loss = [&](std::size_t i, const model::ForwardContext& ctx) { return lm_example_loss(model, v, train[i], ctx); };
  return train_loop(model, train.size(), loss, cfg, seed, state, hook);
}

std::vector<double> LMScorer::token_nll(const corpus::Utterance& u) {
  const auto in = encode_utterance(u, vocab_, true, model_.spec().use_bigram_stream);
  const auto targets = lm_targets(u, vocab_.unigrams);
  const auto logp = nn::log_softmax_rows(model_.lm_logits(model_.encode(in, {})).value());
  std::vector<double> out;
  out.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) out.push_back(-logp(i, static_cast<std::size_t>(targets[i])));
  return out;
}

}  // namespace cmlab::tasks
