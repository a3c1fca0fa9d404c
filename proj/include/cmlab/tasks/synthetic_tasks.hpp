#pragma once

#include <span>
#include <string>
#include <vector>

#include "cmlab/corpus/types.hpp"

namespace cmlab::tasks {

/// Label tied to switching points: the word right after the first switching
/// point picks labels[fnv1a(word) mod |labels|]; utterances without a switch
/// get labels.back().
std::string switch_cued_label(const corpus::Utterance& u, std::span<const std::string> labels);
void attach_switch_cued_labels(std::vector<corpus::Utterance>& corpus, std::span<const std::string> labels);

/// Word-by-word rendering into the second language: an L1 word's leading
/// 'h' becomes 'e' (matching the synthetic vocabulary prefixes), everything
/// else is kept. With `copy`, the target is the source itself.
std::string synthetic_translation(const corpus::Utterance& u, bool copy);
void attach_translations(std::vector<corpus::Utterance>& corpus, bool copy);

}  // namespace cmlab::tasks
