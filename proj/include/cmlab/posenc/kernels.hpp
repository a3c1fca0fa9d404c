#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cmlab/corpus/types.hpp"
#include "cmlab/nn/autograd.hpp"
#include "cmlab/posenc/config.hpp"
#include "cmlab/posenc/rotary.hpp"

namespace cmlab::posenc {

/// Query/key projections of one layer (and head). Both d_model x d_proj.
struct Projection {
  nn::Var w_q;
  nn::Var w_k;
};

/// Interleaved table: row pos holds (sin(pos w_0), cos(pos w_0), sin(pos w_1), ...)
/// with w_i = base^(-2i/d). Throws for odd d_model.
nn::Tensor sinusoidal_table(std::size_t max_len, std::size_t d_model, double base = 10000.0);

/// q k^T / sqrt(width), the content-only logits.
nn::Var content_logits(const nn::Var& q, const nn::Var& k);

/// out(i, j) = q_i . rel[clip(i - j, -k, k) + k]; rel has 2k+1 rows. Unscaled.
nn::Var relative_key_logits(const nn::Var& q, const nn::Var& rel, int clip_k);

/// Row indices 0..n-1.
std::vector<int> iota_positions(std::size_t n);

// Attention logits (T x T, pre-softmax, scaled by 1/sqrt(d_proj)) for each
// positional scheme, over token embeddings x (T x d_model).

/// ((x_i + p_i) W_Q) ((x_j + p_j) W_K)^T with p from a fixed table.
nn::Var attn_sinusoidal(const nn::Var& x, const nn::Tensor& table, const Projection& proj);

/// Same form with a learnable table indexed by absolute position.
nn::Var attn_dynamic(const nn::Var& x, const nn::Var& theta_table, const Projection& proj);

/// (x_i W_Q) (x_j W_K + a_{i-j})^T with offsets clipped to [-k, k].
nn::Var attn_relative(const nn::Var& x, const nn::Var& rel, int clip_k, const Projection& proj);

/// ((x_i + Theta(spi_i)) W_Q) ((x_j + Theta(spi_j)) W_K + a_{i-j})^T.
nn::Var attn_spdrpe(const nn::Var& x, const nn::Var& theta_table, const nn::Var& rel, int clip_k,
                    std::span<const int> spi, const Projection& proj);

/// (RM_i W_Q x_i)^T (RM_j W_K x_j) at the given positions.
nn::Var attn_rotary(const nn::Var& x, std::span<const int> positions, const RotaryTable& table,
                    const Projection& proj);

/// Rotary logits where positions flagged -1 use the switching-point rotation.
nn::Var attn_sp_rotary(const nn::Var& x, std::span<const int> positions, const SignPattern& sign,
                       const RotaryTable& table, const Projection& proj, SprmMode mode = SprmMode::Transpose);

struct Bigram {
  std::string surface;  // "first_second"
  corpus::LanguageTag first = corpus::LanguageTag::Other;
  corpus::LanguageTag second = corpus::LanguageTag::Other;
  bool is_sp = false;  // both tags are languages and they differ
};

/// Adjacent token pairs: n tokens give n-1 bigrams.
std::vector<Bigram> bigramize(std::span<const corpus::Token> tokens);
SignPattern bigram_sign_pattern(std::span<const Bigram> bigrams);

/// a * uni + b * bi. A bigram stream one row shorter than the unigram stream
/// is padded with a zero row (at the back, or at the front when
/// `pad_front`); any other length mismatch is rejected. a and b are 1 x 1.
nn::Var combine_streams(const nn::Var& uni, const nn::Var& bi, const nn::Var& a, const nn::Var& b,
                        bool pad_front = false);

}  // namespace cmlab::posenc
