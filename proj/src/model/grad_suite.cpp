#include "cmlab/model/grad_suite.hpp"

#include <memory>

#include "cmlab/model/transformer.hpp"
#include "cmlab/nn/ops.hpp"
#include "cmlab/posenc/kernels.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::model {

using nn::Tensor;
using nn::Var;
using posenc::Variant;

namespace {

constexpr std::size_t kDim = 8;
constexpr std::size_t kSeq = 6;
constexpr int kClip = 2;

Var random_leaf(std::size_t r, std::size_t c, Rng& rng) { return nn::parameter(nn::uniform_init(r, c, 1.0, rng)); }

void add_kernel_cases(std::vector<GradCase>& out, Rng& rng) {
  const Var x = random_leaf(kSeq, kDim, rng);
  const posenc::Projection proj{random_leaf(kDim, kDim, rng), random_leaf(kDim, kDim, rng)};
  const Var theta = random_leaf(16, kDim, rng);
  const Var rel = random_leaf(2 * kClip + 1, kDim, rng);
  auto table = std::make_shared<posenc::RotaryTable>(kDim, 10000.0, 16);
  auto sin_table = std::make_shared<Tensor>(posenc::sinusoidal_table(16, kDim));
  auto pos = std::make_shared<std::vector<int>>(posenc::iota_positions(kSeq));
  auto spi = std::make_shared<std::vector<int>>(std::vector<int>{0, 1, 0, 1, 2, 0});
  auto sign = std::make_shared<posenc::SignPattern>(posenc::SignPattern::from_flags({1, -1, 1, 1, 1, -1}));
  const std::vector<std::pair<std::string, Var>> base{{"x", x}, {"w_q", proj.w_q}, {"w_k", proj.w_k}};
  auto plus = [&](std::vector<std::pair<std::string, Var>> extra) {
    auto all = base;
    all.insert(all.end(), extra.begin(), extra.end());
    return all;
  };
  out.push_back({"logits/SINUSOIDAL", [=] { return posenc::attn_sinusoidal(x, *sin_table, proj); }, base});
  out.push_back({"logits/DYNAMIC", [=] { return posenc::attn_dynamic(x, theta, proj); }, plus({{"theta", theta}})});
  out.push_back({"logits/RELATIVE", [=] { return posenc::attn_relative(x, rel, kClip, proj); }, plus({{"rel", rel}})});
  out.push_back({"logits/SPDRPE", [=] { return posenc::attn_spdrpe(x, theta, rel, kClip, *spi, proj); },
                 plus({{"theta", theta}, {"rel", rel}})});
  out.push_back({"logits/ROTARY", [=] { return posenc::attn_rotary(x, *pos, *table, proj); }, base});
  out.push_back({"logits/SP_ROTARY", [=] { return posenc::attn_sp_rotary(x, *pos, *sign, *table, proj); }, base});

  const Var bi = random_leaf(kSeq - 1, kDim, rng);
  const Var a = random_leaf(1, 1, rng);
  const Var b = random_leaf(1, 1, rng);
  out.push_back({"combine_streams", [=] { return posenc::combine_streams(x, bi, a, b); },
                 {{"uni", x}, {"bi", bi}, {"a", a}, {"b", b}}});
}

// Moves every parameter away from its structured initial value (zero tables,
// unit gains) so the check does not sit on a symmetric point.
void perturb(Transformer& m, Rng& rng) {
  for (auto& [name, v] : m.params().entries())
    for (auto& e : v.mutable_value().values()) e += rng.uniform(-0.5, 0.5);
}

std::vector<std::pair<std::string, Var>> all_leaves(Transformer& m) { return m.params().entries(); }

ModelSpec small_spec(Variant v, TaskKind task) {
  ModelSpec s;
  s.task = task;
  s.n_layers = 1;
  s.n_heads = 2;
  s.d_model = static_cast<int>(kDim);
  s.d_ff = static_cast<int>(kDim);
  s.dropout_p = 0.0;
  s.pe.variant = v;
  s.pe.d_model = s.d_model;
  s.pe.clip_k = kClip;
  s.pe.max_len = 16;
  s.unigram_vocab = 7;
  s.bigram_vocab = 9;
  s.target_vocab = 5;
  s.n_classes = 3;
  return s;
}

EncoderInput sample_input(bool with_bigrams) {
  using corpus::LanguageTag;
  const std::vector<LanguageTag> tags{LanguageTag::L1, LanguageTag::L2,    LanguageTag::L2,
                                      LanguageTag::L1, LanguageTag::Other, LanguageTag::L2};
  EncoderInput in;
  in.ids = {1, 4, 2, 5, 0, 6};
  in.pos = position_info(tags);
  if (with_bigrams) {
    in.bigram_ids = {3, 8, 1, 0, 7};
    std::vector<int> flags;
    for (std::size_t i = 0; i + 1 < tags.size(); ++i)
      flags.push_back(corpus::is_language(tags[i]) && corpus::is_language(tags[i + 1]) && tags[i] != tags[i + 1] ? -1
                                                                                                                 : 1);
    in.bigram_pos = plain_positions(flags.size());
    in.bigram_pos.sign = posenc::SignPattern::from_flags(flags);
  }
  return in;
}

void add_stack_case(std::vector<GradCase>& out, const std::string& name, ModelSpec spec, Rng& rng) {
  auto model = std::make_shared<Transformer>(spec, rng.next_u64());
  perturb(*model, rng);
  auto in = std::make_shared<EncoderInput>(sample_input(spec.use_bigram_stream));
  std::function<Var()> f;
  switch (spec.task) {
    case TaskKind::LanguageModel:
      f = [model, in] {
        const std::vector<int> targets{4, 2, 5, 0, 6, 3};
        return nn::cross_entropy_sum(model->lm_logits(model->encode(*in, {})), targets);
      };
      break;
    case TaskKind::Classifier:
      f = [model, in] { return model->class_logits(model->encode(*in, {})); };
      break;
    case TaskKind::Translation:
      f = [model, in] {
        const std::vector<int> target_in{1, 3, 2, 4};
        const std::vector<int> target_out{3, 2, 4, 0};
        return nn::cross_entropy_sum(model->decode(model->encode(*in, {}), target_in, {}), target_out);
      };
      break;
  }
  out.push_back({name, f, all_leaves(*model)});
}

}  // namespace

std::vector<GradCase> gradient_suite(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "grad-suite"));
  std::vector<GradCase> out;
  add_kernel_cases(out, rng);
  for (Variant v : posenc::kAllVariants)
    add_stack_case(out, "stack/" + std::string(posenc::variant_name(v)), small_spec(v, TaskKind::LanguageModel), rng);
  auto two_stream = small_spec(Variant::SpRotary, TaskKind::Classifier);
  two_stream.use_bigram_stream = true;
  add_stack_case(out, "stack/SP_ROTARY+bigram/classifier", two_stream, rng);
  add_stack_case(out, "stack/SP_ROTARY/translation", small_spec(Variant::SpRotary, TaskKind::Translation), rng);
  return out;
}

std::vector<GradCaseResult> run_gradient_suite(std::uint64_t seed, const nn::GradCheckOptions& options) {
  std::vector<GradCaseResult> results;
  for (const auto& c : gradient_suite(seed)) results.push_back({c.name, nn::grad_check(c.f, c.leaves, options)});
  return results;
}

}  // namespace cmlab::model
