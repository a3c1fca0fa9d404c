#include "cmlab/model/transformer.hpp"

#include <cmath>
#include <stdexcept>

#include "cmlab/corpus/codemix.hpp"
#include "cmlab/nn/ops.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::model {

using nn::Tensor;
using nn::Var;
using posenc::Variant;

PositionInfo position_info(std::span<const corpus::LanguageTag> tags) {
  PositionInfo info;
  info.positions = posenc::iota_positions(tags.size());
  const auto sp = corpus::detect_switching_points(tags);
  info.spi = corpus::compute_spi(tags.size(), sp);
  info.sign = posenc::build_spm(sp, tags.size());
  return info;
}

PositionInfo plain_positions(std::size_t n) {
  PositionInfo info;
  info.positions = posenc::iota_positions(n);
  info.spi = info.positions;
  info.sign = posenc::SignPattern::all_positive(n);
  return info;
}

namespace {

std::string layer_prefix(const std::string& stack, int l) { return stack + ".l" + std::to_string(l); }

Tensor ones_row(std::size_t n) { return Tensor(1, n, 1.0); }

}  // namespace

Transformer::Transformer(const ModelSpec& spec, std::uint64_t init_seed) : spec_(spec) {
  spec_.validate();
  const auto d = static_cast<std::size_t>(spec_.d_model);
  Rng rng(derive_seed(init_seed, "init"));
  const double emb_bound = 1.0 / std::sqrt(static_cast<double>(d));

  params_.add("enc.emb", nn::uniform_init(spec_.unigram_vocab, d, emb_bound, rng));
  init_encoder_stack("enc", rng);
  if (spec_.use_bigram_stream) {
    params_.add("bi.emb", nn::uniform_init(spec_.bigram_vocab, d, emb_bound, rng));
    init_encoder_stack("bi", rng);
    params_.add("mix.a", Tensor(1, 1, 0.5));
    params_.add("mix.b", Tensor(1, 1, 0.5));
  }
  switch (spec_.task) {
    case TaskKind::LanguageModel:
      if (!spec_.tie_embeddings) params_.add("lm.w", nn::uniform_init(d, spec_.unigram_vocab, emb_bound, rng));
      params_.add("lm.b", Tensor(1, spec_.unigram_vocab));
      break;
    case TaskKind::Classifier:
      params_.add("cls.w", nn::uniform_init(d, spec_.n_classes, emb_bound, rng));
      params_.add("cls.b", Tensor(1, spec_.n_classes));
      break;
    case TaskKind::Translation:
      params_.add("dec.emb", nn::uniform_init(spec_.target_vocab, d, emb_bound, rng));
      for (int l = 0; l < spec_.n_layers; ++l) {
        const auto pre = layer_prefix("dec", l);
        init_attention(pre + ".self", true, rng);
        init_attention(pre + ".cross", false, rng);
        init_ffn_and_norms(pre, 3, rng);
      }
      params_.add("dec.out.w", nn::uniform_init(d, spec_.target_vocab, emb_bound, rng));
      params_.add("dec.out.b", Tensor(1, spec_.target_vocab));
      break;
  }

  const auto& pe = spec_.pe;
  if (pe.variant == Variant::Sinusoidal)
    sin_table_ = posenc::sinusoidal_table(static_cast<std::size_t>(pe.max_len), d, pe.base);
  if (pe.is_rotary())
    rotary_.emplace(static_cast<std::size_t>(spec_.head_dim()), pe.base, static_cast<std::size_t>(pe.max_len));
}

void Transformer::init_encoder_stack(const std::string& prefix, Rng& rng) {
  for (int l = 0; l < spec_.n_layers; ++l) {
    const auto pre = layer_prefix(prefix, l);
    init_attention(pre + ".att", true, rng);
    init_ffn_and_norms(pre, 2, rng);
  }
}

void Transformer::init_attention(const std::string& prefix, bool positional, Rng& rng) {
  const auto d = static_cast<std::size_t>(spec_.d_model);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  for (const char* w : {".wq", ".wk", ".wv", ".wo"}) params_.add(prefix + w, nn::uniform_init(d, d, bound, rng));
  params_.add(prefix + ".bo", Tensor(1, d));
  if (!positional) return;
  const auto& pe = spec_.pe;
  if (pe.has_dynamic()) params_.add(prefix + ".theta", Tensor(static_cast<std::size_t>(pe.max_len), d));
  if (pe.has_relative()) params_.add(prefix + ".rel", Tensor(static_cast<std::size_t>(2 * pe.clip_k + 1), d));
}

void Transformer::init_ffn_and_norms(const std::string& prefix, int n_norms, Rng& rng) {
  const auto d = static_cast<std::size_t>(spec_.d_model);
  const auto f = static_cast<std::size_t>(spec_.d_ff);
  params_.add(prefix + ".ff.w1", nn::uniform_init(d, f, 1.0 / std::sqrt(static_cast<double>(d)), rng));
  params_.add(prefix + ".ff.b1", Tensor(1, f));
  params_.add(prefix + ".ff.w2", nn::uniform_init(f, d, 1.0 / std::sqrt(static_cast<double>(f)), rng));
  params_.add(prefix + ".ff.b2", Tensor(1, d));
  for (int i = 1; i <= n_norms; ++i) {
    params_.add(prefix + ".ln" + std::to_string(i) + ".g", ones_row(d));
    params_.add(prefix + ".ln" + std::to_string(i) + ".b", Tensor(1, d));
  }
}

Var Transformer::drop(const Var& x, const ForwardContext& ctx) {
  if (!ctx.training || spec_.dropout_p == 0.0) return x;
  if (!ctx.rng) throw std::invalid_argument("training forward pass needs a dropout RNG");
  return nn::dropout(x, spec_.dropout_p, *ctx.rng, true);
}

Var Transformer::embed(const std::string& table, std::span<const int> ids) {
  if (ids.empty()) throw std::invalid_argument("empty token sequence");
  return nn::scale(nn::gather_rows(p(table), ids), std::sqrt(static_cast<double>(spec_.d_model)));
}

Var Transformer::head_logits(const std::string& prefix, const Var& h, const posenc::Projection& proj,
                             const PositionInfo& pos, int head) {
  const auto& pe = spec_.pe;
  const auto dh = static_cast<std::size_t>(spec_.head_dim());
  const auto col = static_cast<std::size_t>(head) * dh;
  if (pos.size() != h.rows()) throw std::invalid_argument("position metadata length differs from the sequence");
  if (h.rows() > static_cast<std::size_t>(pe.max_len) && !pe.is_rotary() && pe.variant != Variant::Relative)
    throw std::invalid_argument("sequence of " + std::to_string(h.rows()) + " tokens exceeds max_len " +
                                std::to_string(pe.max_len));
  switch (pe.variant) {
    case Variant::Sinusoidal:
      return posenc::attn_sinusoidal(h, sin_table_, proj);
    case Variant::Dynamic:
      return posenc::attn_dynamic(h, p(prefix + ".theta"), proj);
    case Variant::Relative:
      return posenc::attn_relative(h, nn::slice_cols(p(prefix + ".rel"), col, dh), pe.clip_k, proj);
    case Variant::Spdrpe:
      if (pos.spi.size() != h.rows()) throw std::invalid_argument("SPDRPE attention requires 'spi' metadata");
      return posenc::attn_spdrpe(h, p(prefix + ".theta"), nn::slice_cols(p(prefix + ".rel"), col, dh), pe.clip_k,
                                 pos.spi, proj);
    case Variant::Rotary:
      return posenc::attn_rotary(h, pos.positions, *rotary_, proj);
    case Variant::SpRotary:
      if (!pos.sign) throw std::invalid_argument("SP_ROTARY attention requires 'sign' (switching-point) metadata");
      return posenc::attn_sp_rotary(h, pos.positions, *pos.sign, *rotary_, proj, pe.sprm_mode);
  }
  throw std::logic_error("unhandled variant");
}

Var Transformer::self_attention(const std::string& prefix, const Var& h, const PositionInfo& pos, bool causal,
                                std::vector<Tensor>* trace) {
  const auto dh = static_cast<std::size_t>(spec_.head_dim());
  const Var& wq = p(prefix + ".wq");
  const Var& wk = p(prefix + ".wk");
  const Var values = nn::matmul(h, p(prefix + ".wv"));
  std::vector<Var> heads;
  for (int hd = 0; hd < spec_.n_heads; ++hd) {
    const auto col = static_cast<std::size_t>(hd) * dh;
    const posenc::Projection proj{nn::slice_cols(wq, col, dh), nn::slice_cols(wk, col, dh)};
    const Var att = nn::softmax_rows(head_logits(prefix, h, proj, pos, hd), causal);
    if (trace) trace->push_back(att.value());
    heads.push_back(nn::matmul(att, nn::slice_cols(values, col, dh)));
  }
  return nn::add_row(nn::matmul(nn::concat_cols(heads), p(prefix + ".wo")), p(prefix + ".bo"));
}

Var Transformer::cross_attention(const std::string& prefix, const Var& h, const Var& memory) {
  const auto dh = static_cast<std::size_t>(spec_.head_dim());
  const Var q = nn::matmul(h, p(prefix + ".wq"));
  const Var k = nn::matmul(memory, p(prefix + ".wk"));
  const Var v = nn::matmul(memory, p(prefix + ".wv"));
  std::vector<Var> heads;
  for (int hd = 0; hd < spec_.n_heads; ++hd) {
    const auto col = static_cast<std::size_t>(hd) * dh;
    const Var att =
        nn::softmax_rows(posenc::content_logits(nn::slice_cols(q, col, dh), nn::slice_cols(k, col, dh)), false);
    heads.push_back(nn::matmul(att, nn::slice_cols(v, col, dh)));
  }
  return nn::add_row(nn::matmul(nn::concat_cols(heads), p(prefix + ".wo")), p(prefix + ".bo"));
}

Var Transformer::ffn(const std::string& prefix, const Var& h) {
  const Var inner = nn::relu(nn::add_row(nn::matmul(h, p(prefix + ".ff.w1")), p(prefix + ".ff.b1")));
  return nn::add_row(nn::matmul(inner, p(prefix + ".ff.w2")), p(prefix + ".ff.b2"));
}

Var Transformer::stack(const std::string& prefix, std::span<const int> ids, const PositionInfo& pos, bool causal,
                       const ForwardContext& ctx, AttentionTrace* trace) {
  Var h = drop(embed(prefix + ".emb", ids), ctx);
  for (int l = 0; l < spec_.n_layers; ++l) {
    const auto pre = layer_prefix(prefix, l);
    std::vector<Tensor>* layer_trace = nullptr;
    if (trace) layer_trace = &trace->layers.emplace_back();
    const Var a = self_attention(pre + ".att", h, pos, causal, layer_trace);
    h = nn::layer_norm(nn::add(h, drop(a, ctx)), p(pre + ".ln1.g"), p(pre + ".ln1.b"));
    h = nn::layer_norm(nn::add(h, drop(ffn(pre, h), ctx)), p(pre + ".ln2.g"), p(pre + ".ln2.b"));
  }
  return h;
}

Var Transformer::encode(const EncoderInput& in, const ForwardContext& ctx) {
  if (in.pos.size() != in.ids.size()) throw std::invalid_argument("position metadata length differs from ids");
  if (ctx.trace) ctx.trace->layers.clear();
  const bool causal = spec_.causal_encoder();
  Var uni = stack("enc", in.ids, in.pos, causal, ctx, ctx.trace);
  if (!spec_.use_bigram_stream) return uni;
  if (in.bigram_ids.size() != in.bigram_pos.size())
    throw std::invalid_argument("bigram position metadata length differs from bigram ids");
  if (in.bigram_ids.empty()) return nn::scale_by(uni, p("mix.a"));
  const Var bi = stack("bi", in.bigram_ids, in.bigram_pos, causal, ctx, nullptr);
  return posenc::combine_streams(uni, bi, p("mix.a"), p("mix.b"), causal);
}

Var Transformer::lm_logits(const Var& states) {
  if (spec_.task != TaskKind::LanguageModel) throw std::logic_error("lm_logits on a non-LM model");
  const Var logits = spec_.tie_embeddings ? nn::matmul_nt(states, p("enc.emb")) : nn::matmul(states, p("lm.w"));
  return nn::add_row(logits, p("lm.b"));
}

Var Transformer::class_logits(const Var& states) {
  if (spec_.task != TaskKind::Classifier) throw std::logic_error("class_logits on a non-classifier model");
  return nn::add_row(nn::matmul(nn::mean_rows(states, states.rows()), p("cls.w")), p("cls.b"));
}

Var Transformer::decode(const Var& memory, std::span<const int> target_in, const ForwardContext& ctx) {
  if (spec_.task != TaskKind::Translation) throw std::logic_error("decode on a model without a decoder");
  const PositionInfo pos = plain_positions(target_in.size());
  Var y = drop(embed("dec.emb", target_in), ctx);
  for (int l = 0; l < spec_.n_layers; ++l) {
    const auto pre = layer_prefix("dec", l);
    const Var s = self_attention(pre + ".self", y, pos, true, nullptr);
    y = nn::layer_norm(nn::add(y, drop(s, ctx)), p(pre + ".ln1.g"), p(pre + ".ln1.b"));
    const Var c = cross_attention(pre + ".cross", y, memory);
    y = nn::layer_norm(nn::add(y, drop(c, ctx)), p(pre + ".ln2.g"), p(pre + ".ln2.b"));
    y = nn::layer_norm(nn::add(y, drop(ffn(pre, y), ctx)), p(pre + ".ln3.g"), p(pre + ".ln3.b"));
  }
  return nn::add_row(nn::matmul(y, p("dec.out.w")), p("dec.out.b"));
}

std::size_t parameter_count(const ModelSpec& spec) { return Transformer(spec, 0).params().parameter_count(); }

}  // namespace cmlab::model
