#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmlab/corpus/types.hpp"
#include "cmlab/model/spec.hpp"
#include "cmlab/nn/autograd.hpp"
#include "cmlab/nn/params.hpp"
#include "cmlab/posenc/kernels.hpp"
#include "cmlab/posenc/rotary.hpp"

namespace cmlab {
class Rng;
}

namespace cmlab::model {

/// Per-position metadata consumed by the positional kernels.
struct PositionInfo {
  std::vector<int> positions;
  std::vector<int> spi;                     // required by SPDRPE
  std::optional<posenc::SignPattern> sign;  // required by SP_ROTARY
  std::size_t size() const { return positions.size(); }
};

/// Positions 0..n-1 with SPI and sign pattern derived from the tags.
PositionInfo position_info(std::span<const corpus::LanguageTag> tags);
/// A sequence with no switching points: SPI equals the position, all flags +1.
PositionInfo plain_positions(std::size_t n);

struct EncoderInput {
  std::vector<int> ids;
  PositionInfo pos;
  std::vector<int> bigram_ids;  // read only when the bigram stream is on
  PositionInfo bigram_pos;
};

/// Post-softmax attention of the unigram encoder stream: [layer][head] -> T x T.
struct AttentionTrace {
  std::vector<std::vector<nn::Tensor>> layers;
};

struct ForwardContext {
  Rng* rng = nullptr;  // dropout stream; required when training with dropout_p > 0
  bool training = false;
  AttentionTrace* trace = nullptr;
};

/// Post-LN transformer whose self-attention logits come from the configured
/// positional kernel, applied per head.
class Transformer {
 public:
  /// Validates the spec and initializes every parameter from `init_seed`.
  Transformer(const ModelSpec& spec, std::uint64_t init_seed);

  const ModelSpec& spec() const { return spec_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  /// Encoder states, T x d_model. Causal for the language model.
  nn::Var encode(const EncoderInput& in, const ForwardContext& ctx);
  /// Next-token logits, T x unigram_vocab.
  nn::Var lm_logits(const nn::Var& states);
  /// Mean-pooled class logits, 1 x n_classes.
  nn::Var class_logits(const nn::Var& states);
  /// Decoder logits over the target vocabulary for teacher-forced inputs.
  nn::Var decode(const nn::Var& memory, std::span<const int> target_in, const ForwardContext& ctx);

 private:
  void init_encoder_stack(const std::string& prefix, Rng& rng);
  void init_attention(const std::string& prefix, bool positional, Rng& rng);
  void init_ffn_and_norms(const std::string& prefix, int n_norms, Rng& rng);
  nn::Var stack(const std::string& prefix, std::span<const int> ids, const PositionInfo& pos, bool causal,
                const ForwardContext& ctx, AttentionTrace* trace);
  nn::Var self_attention(const std::string& prefix, const nn::Var& h, const PositionInfo& pos, bool causal,
                         std::vector<nn::Tensor>* trace);
  nn::Var cross_attention(const std::string& prefix, const nn::Var& h, const nn::Var& memory);
  nn::Var head_logits(const std::string& prefix, const nn::Var& h, const posenc::Projection& proj,
                      const PositionInfo& pos, int head);
  nn::Var ffn(const std::string& prefix, const nn::Var& h);
  nn::Var drop(const nn::Var& x, const ForwardContext& ctx);
  nn::Var embed(const std::string& table, std::span<const int> ids);
  const nn::Var& p(const std::string& name) const { return params_.get(name); }

  ModelSpec spec_;
  nn::ParamStore params_;
  nn::Tensor sin_table_;
  std::optional<posenc::RotaryTable> rotary_;
};

/// Number of trainable scalars a spec produces.
std::size_t parameter_count(const ModelSpec& spec);

}  // namespace cmlab::model
