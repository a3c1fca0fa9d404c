#include "cmlab/tasks/translate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "cmlab/nn/ops.hpp"

namespace cmlab::tasks {

ExampleLoss translation_example_loss(model::Transformer& model, const Vocabularies& v, const corpus::Utterance& u,
                                     const model::ForwardContext& ctx) {
  std::vector<int> ids;
  for (const auto& w : target_tokens(u)) ids.push_back(v.targets.id(w));
  std::vector<int> in{Vocab::kBos};
  in.insert(in.end(), ids.begin(), ids.end());
  std::vector<int> out = ids;
  out.push_back(Vocab::kEos);
  const auto src = encode_utterance(u, v, false, model.spec().use_bigram_stream);
  const auto memory = model.encode(src, ctx);
  return {nn::cross_entropy_sum(model.decode(memory, in, ctx), out), out.size()};
}

std::vector<TrainLogEntry> train_mt(model::Transformer& model, const Vocabularies& v,
                                    std::span<const corpus::Utterance> pairs, const TrainConfig& cfg,
                                    std::uint64_t seed, model::TrainingState& state, const CheckpointHook& hook) {
  for (const auto& u : pairs) target_tokens(u);
  auto loss = [&](std::size_t i, const model::ForwardContext& ctx) {
    return translation_example_loss(model, v, pairs[i], ctx);
  };
  return train_loop(model, pairs.size(), loss, cfg, seed, state, hook);
}

std::vector<std::string> greedy_decode(model::Transformer& model, const Vocabularies& v, const corpus::Utterance& src,
                                       std::size_t max_len) {
  const auto memory = model.encode(encode_utterance(src, v, false, model.spec().use_bigram_stream), {});
  std::vector<int> in{Vocab::kBos};
  std::vector<std::string> out;
  while (out.size() < max_len) {
    const auto logits = model.decode(memory, in, {}).value();
    const std::size_t last = logits.rows() - 1;
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (logits(last, c) > logits(last, best)) best = c;
    if (static_cast<int>(best) == Vocab::kEos) break;
    out.push_back(v.targets.word(static_cast<int>(best)));
    in.push_back(static_cast<int>(best));
  }
  return out;
}

std::vector<std::string> beam_decode(model::Transformer& model, const Vocabularies& v, const corpus::Utterance& src,
                                     std::size_t max_len, std::size_t width) {
  if (width == 0) throw std::invalid_argument("beam width must be positive");
  const auto memory = model.encode(encode_utterance(src, v, false, model.spec().use_bigram_stream), {});
  struct Hyp {
    std::vector<int> ids;  // starts with <bos>
    double logp = 0.0;
  };
  std::vector<Hyp> alive{{{Vocab::kBos}, 0.0}};
  std::vector<Hyp> finished;
  const auto by_score = [](const Hyp& a, const Hyp& b) { return a.logp > b.logp; };
  for (std::size_t len = 0; len < max_len && !alive.empty(); ++len) {
    std::vector<Hyp> next;
    for (const auto& h : alive) {
      const auto lp = nn::log_softmax_rows(model.decode(memory, h.ids, {}).value());
      const std::size_t last = lp.rows() - 1;
      std::vector<std::size_t> order(lp.cols());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return lp(last, a) > lp(last, b); });
      for (std::size_t k = 0; k < std::min(width, order.size()); ++k) {
        Hyp n = h;
        n.ids.push_back(static_cast<int>(order[k]));
        n.logp += lp(last, order[k]);
        next.push_back(std::move(n));
      }
    }
    std::stable_sort(next.begin(), next.end(), by_score);
    alive.clear();
    for (std::size_t k = 0; k < std::min(width, next.size()); ++k) {
      if (next[k].ids.back() == Vocab::kEos)
        finished.push_back(std::move(next[k]));
      else
        alive.push_back(std::move(next[k]));
    }
    std::stable_sort(finished.begin(), finished.end(), by_score);
    if (!finished.empty() && (alive.empty() || alive.front().logp <= finished.front().logp)) break;
  }
  const Hyp* best = nullptr;
  if (!finished.empty()) best = &finished.front();
  if (!alive.empty() && (!best || alive.front().logp > best->logp)) best = &alive.front();
  std::vector<std::string> out;
  for (std::size_t i = 1; i < best->ids.size(); ++i) {
    if (best->ids[i] == Vocab::kEos) break;
    out.push_back(v.targets.word(best->ids[i]));
  }
  return out;
}

}  // namespace cmlab::tasks
