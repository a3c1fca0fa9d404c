#pragma once

#include <vector>

#include "cmlab/corpus/types.hpp"
#include "cmlab/model/transformer.hpp"
#include "cmlab/tasks/vocab.hpp"

namespace cmlab::tasks {

/// Vocabularies a model reads and writes. `bigrams` is empty unless the
/// bigram stream is on; `targets` is used by translation only.
struct Vocabularies {
  Vocab unigrams;
  Vocab bigrams;
  Vocab targets;
};

/// Encoder input for an utterance. With `add_bos`, a <bos> token tagged
/// OTHER is prepended, which shifts every position by one and leaves the
/// switching points of the words unchanged. Bigram ids are filled only when
/// `with_bigrams`.
model::EncoderInput encode_utterance(const corpus::Utterance& u, const Vocabularies& v, bool add_bos,
                                     bool with_bigrams);

/// Next-token targets for a <bos>-prefixed input: the word ids then <eos>.
std::vector<int> lm_targets(const corpus::Utterance& u, const Vocab& vocab);

/// Position metadata for a stream whose switching points are given as flags:
/// SPI restarts at every flagged index.
model::PositionInfo positions_from_flags(const std::vector<int>& flags);

/// Space-separated target tokens of a translation pair.
std::vector<std::string> target_tokens(const corpus::Utterance& u);

}  // namespace cmlab::tasks
