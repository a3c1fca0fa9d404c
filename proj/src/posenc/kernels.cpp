#include "cmlab/posenc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cmlab/nn/ops.hpp"

namespace cmlab::posenc {

using nn::Tensor;
using nn::Var;

namespace {

void check_input(const Var& x, const Projection& proj) {
  if (proj.w_q.rows() != x.cols() || proj.w_k.rows() != x.cols())
    throw std::invalid_argument("attention: projection rows must equal the embedding width");
  if (proj.w_q.cols() != proj.w_k.cols()) throw std::invalid_argument("attention: W_Q and W_K widths differ");
  if (x.rows() == 0) throw std::invalid_argument("attention: empty sequence");
}

Var additive_logits(const Var& x, const Var& pos, const Projection& proj) {
  const Var h = nn::add(x, pos);
  return content_logits(nn::matmul(h, proj.w_q), nn::matmul(h, proj.w_k));
}

Var lookup_positions(const Var& table, std::span<const int> idx, const char* who) {
  for (int i : idx)
    if (i < 0 || static_cast<std::size_t>(i) >= table.rows())
      throw std::invalid_argument(std::string(who) + ": index " + std::to_string(i) + " outside table of " +
                                  std::to_string(table.rows()) + " rows");
  return nn::gather_rows(table, idx);
}

}  // namespace

Tensor sinusoidal_table(std::size_t max_len, std::size_t d_model, double base) {
  if (d_model == 0 || d_model % 2 != 0) throw std::invalid_argument("sinusoidal_table: d_model must be even");
  Tensor t(max_len, d_model);
  for (std::size_t pos = 0; pos < max_len; ++pos) {
    for (std::size_t i = 0; i < d_model / 2; ++i) {
      const double w = std::pow(base, -2.0 * static_cast<double>(i) / static_cast<double>(d_model));
      t(pos, 2 * i) = std::sin(static_cast<double>(pos) * w);
      t(pos, 2 * i + 1) = std::cos(static_cast<double>(pos) * w);
    }
  }
  return t;
}

Var content_logits(const Var& q, const Var& k) {
  return nn::scale(nn::matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(q.cols())));
}

Var relative_key_logits(const Var& q, const Var& rel, int clip_k) {
  if (clip_k <= 0) throw std::invalid_argument("relative_key_logits: clip_k must be positive");
  if (rel.rows() != static_cast<std::size_t>(2 * clip_k + 1) || rel.cols() != q.cols())
    throw std::invalid_argument("relative_key_logits: table must be (2k+1) x width");
  const std::size_t t = q.rows(), w = q.cols();
  auto index = [clip_k](std::size_t i, std::size_t j) {
    const long off = static_cast<long>(i) - static_cast<long>(j);
    return static_cast<std::size_t>(std::clamp<long>(off, -clip_k, clip_k) + clip_k);
  };
  Tensor out(t, t);
  const Tensor& qv = q.value();
  const Tensor& rv = rel.value();
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      const double* a = rv.row(index(i, j)).data();
      double s = 0;
      for (std::size_t c = 0; c < w; ++c) s += qv(i, c) * a[c];
      out(i, j) = s;
    }
  }
  return Var::make(std::move(out), {q, rel}, [index](nn::Node& n) {
    nn::Node& pq = *n.parents[0];
    nn::Node& pr = *n.parents[1];
    const std::size_t t = n.grad.rows(), w = pq.value.cols();
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < t; ++j) {
        const double g = n.grad(i, j);
        if (g == 0.0) continue;
        const std::size_t r = index(i, j);
        if (pq.requires_grad) {
          Tensor& gq = pq.grad_buffer();
          for (std::size_t c = 0; c < w; ++c) gq(i, c) += g * pr.value(r, c);
        }
        if (pr.requires_grad) {
          Tensor& gr = pr.grad_buffer();
          for (std::size_t c = 0; c < w; ++c) gr(r, c) += g * pq.value(i, c);
        }
      }
    }
  });
}

std::vector<int> iota_positions(std::size_t n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Var attn_sinusoidal(const Var& x, const Tensor& table, const Projection& proj) {
  check_input(x, proj);
  if (table.cols() != x.cols()) throw std::invalid_argument("attn_sinusoidal: table width differs from embeddings");
  const auto idx = iota_positions(x.rows());
  return additive_logits(x, lookup_positions(nn::constant(table), idx, "attn_sinusoidal"), proj);
}

Var attn_dynamic(const Var& x, const Var& theta_table, const Projection& proj) {
  check_input(x, proj);
  if (theta_table.cols() != x.cols()) throw std::invalid_argument("attn_dynamic: table width differs from embeddings");
  const auto idx = iota_positions(x.rows());
  return additive_logits(x, lookup_positions(theta_table, idx, "attn_dynamic"), proj);
}

Var attn_relative(const Var& x, const Var& rel, int clip_k, const Projection& proj) {
  check_input(x, proj);
  const Var q = nn::matmul(x, proj.w_q);
  const Var k = nn::matmul(x, proj.w_k);
  const double s = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return nn::scale(nn::add(nn::matmul_nt(q, k), relative_key_logits(q, rel, clip_k)), s);
}

Var attn_spdrpe(const Var& x, const Var& theta_table, const Var& rel, int clip_k, std::span<const int> spi,
                const Projection& proj) {
  check_input(x, proj);
  if (spi.size() != x.rows()) throw std::invalid_argument("attn_spdrpe: one SPI value per token required");
  if (theta_table.cols() != x.cols()) throw std::invalid_argument("attn_spdrpe: table width differs from embeddings");
  const Var h = nn::add(x, lookup_positions(theta_table, spi, "attn_spdrpe"));
  const Var q = nn::matmul(h, proj.w_q);
  const Var k = nn::matmul(h, proj.w_k);
  const double s = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return nn::scale(nn::add(nn::matmul_nt(q, k), relative_key_logits(q, rel, clip_k)), s);
}

Var attn_rotary(const Var& x, std::span<const int> positions, const RotaryTable& table, const Projection& proj) {
  check_input(x, proj);
  if (positions.size() != x.rows()) throw std::invalid_argument("attn_rotary: one position per token required");
  const Var q = rotate_rows(nn::matmul(x, proj.w_q), positions, nullptr, table);
  const Var k = rotate_rows(nn::matmul(x, proj.w_k), positions, nullptr, table);
  return content_logits(q, k);
}

Var attn_sp_rotary(const Var& x, std::span<const int> positions, const SignPattern& sign, const RotaryTable& table,
                   const Projection& proj, SprmMode mode) {
  check_input(x, proj);
  if (positions.size() != x.rows()) throw std::invalid_argument("attn_sp_rotary: one position per token required");
  if (sign.size() != x.rows()) throw std::invalid_argument("attn_sp_rotary: sign pattern length differs from sequence");
  const Var q = rotate_rows(nn::matmul(x, proj.w_q), positions, &sign, table, mode);
  const Var k = rotate_rows(nn::matmul(x, proj.w_k), positions, &sign, table, mode);
  return content_logits(q, k);
}

std::vector<Bigram> bigramize(std::span<const corpus::Token> tokens) {
  std::vector<Bigram> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    Bigram b;
    b.surface = tokens[i].surface + "_" + tokens[i + 1].surface;
    b.first = tokens[i].tag;
    b.second = tokens[i + 1].tag;
    b.is_sp = corpus::is_language(b.first) && corpus::is_language(b.second) && b.first != b.second;
    out.push_back(std::move(b));
  }
  return out;
}

SignPattern bigram_sign_pattern(std::span<const Bigram> bigrams) {
  std::vector<int> flags;
  flags.reserve(bigrams.size());
  for (const auto& b : bigrams) flags.push_back(b.is_sp ? -1 : 1);
  return SignPattern::from_flags(std::move(flags));
}

Var combine_streams(const Var& uni, const Var& bi, const Var& a, const Var& b, bool pad_front) {
  if (uni.cols() != bi.cols()) throw std::invalid_argument("combine_streams: stream widths differ");
  Var aligned = bi;
  if (bi.rows() + 1 == uni.rows()) {
    aligned = nn::pad_rows(bi, uni.rows(), pad_front);
  } else if (bi.rows() != uni.rows()) {
    throw std::invalid_argument("combine_streams: bigram stream must have n or n-1 rows");
  }
  return nn::add(nn::scale_by(uni, a), nn::scale_by(aligned, b));
}

}  // namespace cmlab::posenc
