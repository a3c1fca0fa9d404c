#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmlab/model/transformer.hpp"
#include "cmlab/tasks/encoding.hpp"
#include "cmlab/tasks/train.hpp"

namespace cmlab::tasks {

/// Teacher-forced loss: decoder input is <bos> + target, output target + <eos>.
ExampleLoss translation_example_loss(model::Transformer& model, const Vocabularies& v, const corpus::Utterance& u,
                                     const model::ForwardContext& ctx);

std::vector<TrainLogEntry> train_mt(model::Transformer& model, const Vocabularies& v,
                                    std::span<const corpus::Utterance> pairs, const TrainConfig& cfg,
                                    std::uint64_t seed, model::TrainingState& state, const CheckpointHook& hook = {});

/// Greedy decoding; stops at <eos> (not emitted) or after `max_len` tokens.
std::vector<std::string> greedy_decode(model::Transformer& model, const Vocabularies& v, const corpus::Utterance& src,
                                       std::size_t max_len);

/// Beam search over summed log-probabilities. A hypothesis ends at <eos>;
/// search stops once the best finished hypothesis beats every live one.
/// Width 1 reproduces greedy_decode.
std::vector<std::string> beam_decode(model::Transformer& model, const Vocabularies& v, const corpus::Utterance& src,
                                     std::size_t max_len, std::size_t width);

}  // namespace cmlab::tasks
