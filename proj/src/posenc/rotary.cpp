#include "cmlab/posenc/rotary.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cmlab::posenc {

std::vector<double> rope_angles(std::size_t d, double base) {
  if (d == 0 || d % 2 != 0) throw std::invalid_argument("rope_angles: dimension must be even and positive");
  if (!(base > 1.0)) throw std::invalid_argument("rope_angles: base must exceed 1");
  std::vector<double> th(d / 2);
  for (std::size_t i = 0; i < th.size(); ++i)
    th[i] = std::pow(base, -2.0 * static_cast<double>(i) / static_cast<double>(d));
  return th;
}

RotaryTable::RotaryTable(std::size_t d, double base, std::size_t max_len)
    : thetas_(rope_angles(d, base)), max_len_(max_len), cos_(max_len * thetas_.size()), sin_(max_len * thetas_.size()) {
  for (std::size_t m = 0; m < max_len; ++m) {
    for (std::size_t k = 0; k < thetas_.size(); ++k) {
      const double a = static_cast<double>(m) * thetas_[k];
      cos_[m * thetas_.size() + k] = std::cos(a);
      sin_[m * thetas_.size() + k] = std::sin(a);
    }
  }
}

double RotaryTable::cos(std::size_t m, std::size_t block) const {
  if (m < max_len_) return cos_[m * thetas_.size() + block];
  return std::cos(static_cast<double>(m) * thetas_[block]);
}

double RotaryTable::sin(std::size_t m, std::size_t block) const {
  if (m < max_len_) return sin_[m * thetas_.size() + block];
  return std::sin(static_cast<double>(m) * thetas_[block]);
}

SignPattern SignPattern::from_flags(std::vector<int> flags) {
  for (int f : flags)
    if (f != 1 && f != -1) throw std::invalid_argument("SignPattern: flags must be +1 or -1");
  return SignPattern(std::move(flags));
}

bool SignPattern::any_negative() const {
  for (int f : flags_)
    if (f < 0) return true;
  return false;
}

SignPattern build_spm(std::span<const std::size_t> sp_indices, std::size_t seq_len) {
  std::vector<int> flags(seq_len, 1);
  for (std::size_t i : sp_indices) {
    if (i == 0 || i >= seq_len)
      throw std::invalid_argument("build_spm: switching point " + std::to_string(i) + " invalid for length " +
                                  std::to_string(seq_len));
    flags[i] = -1;
  }
  return SignPattern::from_flags(std::move(flags));
}

Block2 rotation_block(const RotaryTable& table, std::size_t m, std::size_t block, int sign, SprmMode mode) {
  const double c = table.cos(m, block);
  const double s = table.sin(m, block);
  if (sign >= 0) return {c, -s, s, c};
  if (mode == SprmMode::Transpose) return {c, s, -s, c};
  return {-c, s, -s, -c};
}

Sprm build_sprm(const SignPattern& sign, const RotaryTable& table, SprmMode mode) {
  const std::size_t blocks = table.dim() / 2;
  Sprm out(sign.size(), std::vector<Block2>(blocks));
  for (std::size_t m = 0; m < sign.size(); ++m)
    for (std::size_t k = 0; k < blocks; ++k) out[m][k] = rotation_block(table, m, k, sign[m], mode);
  return out;
}

std::vector<double> apply_rotary(std::span<const double> x, std::size_t m, const RotaryTable& table, int sign,
                                 SprmMode mode) {
  if (x.size() != table.dim()) throw std::invalid_argument("apply_rotary: vector length must equal table dimension");
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size() / 2; ++k) {
    const Block2 b = rotation_block(table, m, k, sign, mode);
    y[2 * k] = b[0] * x[2 * k] + b[1] * x[2 * k + 1];
    y[2 * k + 1] = b[2] * x[2 * k] + b[3] * x[2 * k + 1];
  }
  return y;
}

nn::Var rotate_rows(const nn::Var& x, std::span<const int> positions, const SignPattern* sign,
                    const RotaryTable& table, SprmMode mode) {
  const std::size_t rows = x.rows(), width = x.cols(), seg = table.dim();
  if (positions.size() != rows) throw std::invalid_argument("rotate_rows: one position per row required");
  if (sign && sign->size() != rows) throw std::invalid_argument("rotate_rows: sign pattern length differs from rows");
  if (width % seg != 0) throw std::invalid_argument("rotate_rows: width must be a multiple of the table dimension");
  const std::size_t blocks = seg / 2;
  // Blocks per row, shared by forward and backward.
  std::vector<Block2> mats(rows * blocks);
  for (std::size_t i = 0; i < rows; ++i) {
    if (positions[i] < 0) throw std::invalid_argument("rotate_rows: negative position");
    const int s = sign ? (*sign)[i] : 1;
    for (std::size_t k = 0; k < blocks; ++k)
      mats[i * blocks + k] = rotation_block(table, static_cast<std::size_t>(positions[i]), k, s, mode);
  }
  const nn::Tensor& in = x.value();
  nn::Tensor out(rows, width);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < width; c += 2) {
      const Block2& b = mats[i * blocks + (c % seg) / 2];
      const double x1 = in(i, c), x2 = in(i, c + 1);
      out(i, c) = b[0] * x1 + b[1] * x2;
      out(i, c + 1) = b[2] * x1 + b[3] * x2;
    }
  }
  return nn::Var::make(std::move(out), {x}, [mats = std::move(mats), blocks, seg](nn::Node& n) {
    nn::Tensor& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t c = 0; c < g.cols(); c += 2) {
        const Block2& b = mats[i * blocks + (c % seg) / 2];
        const double d1 = n.grad(i, c), d2 = n.grad(i, c + 1);
        g(i, c) += b[0] * d1 + b[2] * d2;
        g(i, c + 1) += b[1] * d1 + b[3] * d2;
      }
    }
  });
}

}  // namespace cmlab::posenc
