#include "cmlab/tasks/train.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "cmlab/nn/ops.hpp"
#include "cmlab/nn/optim.hpp"
#include "cmlab/posenc/kernels.hpp"
#include "cmlab/util/errors.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::tasks {

using json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (steps == 0) throw std::invalid_argument("train: steps must be positive");
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  if (!(lr_scale > 0.0)) throw std::invalid_argument("train: lr_scale must be positive");
  if (warmup_steps <= 0) throw std::invalid_argument("train: warmup_steps must be positive");
  if (log_every == 0) throw std::invalid_argument("train: log_every must be positive");
  if (checkpoint_every == 0) throw std::invalid_argument("train: checkpoint_every must be positive");
}

json to_json(const TrainConfig& c) {
  json j;
  j["steps"] = c.steps;
  j["batch_size"] = c.batch_size;
  j["lr_scale"] = c.lr_scale;
  j["warmup_steps"] = c.warmup_steps;
  j["log_every"] = c.log_every;
  j["checkpoint_every"] = c.checkpoint_every;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("train: expected an object");
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "steps") c.steps = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "lr_scale") c.lr_scale = value.get<double>();
      else if (key == "warmup_steps") c.warmup_steps = value.get<int>();
      else if (key == "log_every") c.log_every = value.get<std::size_t>();
      else if (key == "checkpoint_every") c.checkpoint_every = value.get<std::size_t>();
      else throw std::invalid_argument("train: unknown key '" + key + "'");
    } catch (const json::type_error&) {
      throw std::invalid_argument("train: wrong type for key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "batches", epoch));
  rng.shuffle(order.begin(), order.end());
  return order;
}

std::vector<nn::Tensor> snapshot(const model::Transformer& m) {
  std::vector<nn::Tensor> s;
  for (const auto& [name, v] : m.params().entries()) s.push_back(v.value());
  return s;
}

}  // namespace

std::vector<TrainLogEntry> train_loop(model::Transformer& model, std::size_t n_examples, const ExampleLossFn& loss_fn,
                                      const TrainConfig& cfg, std::uint64_t seed, model::TrainingState& state,
                                      const CheckpointHook& hook) {
  cfg.validate();
  if (n_examples == 0) throw std::invalid_argument("train: no training examples");
  Rng dropout_rng(derive_seed(seed, "dropout"));
  if (state.step > 0) dropout_rng.restore(state.rng_state);
  const nn::LRSchedule schedule{model.spec().d_model, cfg.warmup_steps};

  auto good_params = snapshot(model);
  model::TrainingState good_state = state;
  good_state.rng_state = dropout_rng.state();

  std::vector<TrainLogEntry> log;
  std::size_t cursor = state.step * cfg.batch_size;
  std::size_t cached_epoch = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order;
  auto& params = model.params();

  auto diverge = [&](const std::string& why) {
    auto& entries = params.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].second.mutable_value() = good_params[i];
    params.zero_grad();
    if (hook) hook(good_state);
    throw NumericalError("training diverged at step " + std::to_string(state.step + 1) + " (" + why +
                         "); last good state is from step " + std::to_string(good_state.step));
  };

  while (state.step < cfg.steps) {
    const std::size_t step = state.step + 1;
    params.zero_grad();
    model::ForwardContext ctx{&dropout_rng, true, nullptr};
    std::vector<ExampleLoss> losses;
    std::size_t count = 0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b, ++cursor) {
      const std::size_t epoch = cursor / n_examples;
      if (epoch != cached_epoch) {
        order = epoch_order(n_examples, seed, epoch);
        cached_epoch = epoch;
      }
      losses.push_back(loss_fn(order[cursor % n_examples], ctx));
      count += losses.back().count;
    }
    if (count == 0) throw std::invalid_argument("train: batch has nothing to predict");
    double batch_loss = 0.0;
    const double norm = 1.0 / static_cast<double>(count);
    for (auto& l : losses) {
      batch_loss += l.loss.value()(0, 0);
      nn::scale(l.loss, norm).backward();
    }
    batch_loss *= norm;
    if (!std::isfinite(batch_loss)) diverge("non-finite loss");
    const double lr = cfg.lr_scale * nn::warmup_lr(static_cast<std::int64_t>(step), schedule);
    try {
      nn::adam_step(params, state.optimizer, lr);
    } catch (const NumericalError& e) {
      diverge(e.what());
    }
    state.step = step;
    if (step % cfg.log_every == 0 || step == 1 || step == cfg.steps) log.push_back({step, lr, batch_loss});
    if (step % cfg.checkpoint_every == 0 || step == cfg.steps) {
      state.rng_state = dropout_rng.state();
      good_params = snapshot(model);
      good_state = state;
      if (hook) hook(state);
    }
  }
  params.zero_grad();
  return log;
}

Vocabularies build_vocabularies(std::span<const corpus::Utterance> corpus, bool bigrams, bool bos_bigrams,
                                bool targets) {
  Vocabularies v;
  std::map<std::string, std::size_t> uni, bi, tgt;
  const std::string bos = v.unigrams.word(Vocab::kBos);
  for (const auto& u : corpus) {
    for (const auto& t : u.tokens) ++uni[t.surface];
    if (bigrams) {
      std::vector<corpus::Token> toks;
      if (bos_bigrams) toks.push_back({bos, corpus::LanguageTag::Other});
      toks.insert(toks.end(), u.tokens.begin(), u.tokens.end());
      for (const auto& b : posenc::bigramize(toks)) ++bi[b.surface];
    }
    if (targets)
      for (const auto& w : target_tokens(u)) ++tgt[w];
  }
  v.unigrams = Vocab::build(uni);
  if (bigrams) v.bigrams = Vocab::build(bi);
  if (targets) v.targets = Vocab::build(tgt);
  return v;
}

json to_json(const Vocabularies& v) {
  json j;
  j["unigrams"] = v.unigrams.to_json();
  j["bigrams"] = v.bigrams.to_json();
  j["targets"] = v.targets.to_json();
  return j;
}

Vocabularies vocabularies_from_json(const json& j) {
  Vocabularies v;
  v.unigrams = Vocab::from_json(j.at("unigrams"));
  v.bigrams = Vocab::from_json(j.at("bigrams"));
  v.targets = Vocab::from_json(j.at("targets"));
  return v;
}

}  // namespace cmlab::tasks
