#include "cmlab/tasks/encoding.hpp"

#include <stdexcept>

#include "cmlab/corpus/text.hpp"
#include "cmlab/posenc/kernels.hpp"

namespace cmlab::tasks {

model::PositionInfo positions_from_flags(const std::vector<int>& flags) {
  model::PositionInfo info;
  info.positions = posenc::iota_positions(flags.size());
  info.spi.resize(flags.size());
  int counter = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (i > 0 && flags[i] == -1) counter = 0;
    info.spi[i] = counter++;
  }
  info.sign = posenc::SignPattern::from_flags(flags);
  return info;
}

model::EncoderInput encode_utterance(const corpus::Utterance& u, const Vocabularies& v, bool add_bos,
                                     bool with_bigrams) {
  if (u.tokens.empty()) throw std::invalid_argument("cannot encode an empty utterance");
  std::vector<corpus::Token> tokens;
  tokens.reserve(u.size() + 1);
  if (add_bos) tokens.push_back({v.unigrams.word(Vocab::kBos), corpus::LanguageTag::Other});
  tokens.insert(tokens.end(), u.tokens.begin(), u.tokens.end());

  model::EncoderInput in;
  std::vector<corpus::LanguageTag> tags;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    in.ids.push_back(add_bos && i == 0 ? Vocab::kBos : v.unigrams.id(tokens[i].surface));
    tags.push_back(tokens[i].tag);
  }
  in.pos = model::position_info(tags);
  if (with_bigrams) {
    const auto bigrams = posenc::bigramize(tokens);
    std::vector<int> flags;
    for (const auto& b : bigrams) {
      in.bigram_ids.push_back(v.bigrams.id(b.surface));
      flags.push_back(b.is_sp ? -1 : 1);
    }
    in.bigram_pos = positions_from_flags(flags);
  }
  return in;
}

std::vector<int> lm_targets(const corpus::Utterance& u, const Vocab& vocab) {
  std::vector<int> t;
  t.reserve(u.size() + 1);
  for (const auto& tok : u.tokens) t.push_back(vocab.id(tok.surface));
  t.push_back(Vocab::kEos);
  return t;
}

std::vector<std::string> target_tokens(const corpus::Utterance& u) {
  if (!u.target) throw std::invalid_argument("utterance has no translation target");
  auto words = corpus::split_whitespace(*u.target);
  if (words.empty()) throw std::invalid_argument("empty translation target");
  return words;
}

}  // namespace cmlab::tasks
