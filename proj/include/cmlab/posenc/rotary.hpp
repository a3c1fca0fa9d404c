#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "cmlab/nn/autograd.hpp"
#include "cmlab/posenc/config.hpp"

namespace cmlab::posenc {

/// theta_i = base^(-2(i-1)/d) for i = 1..d/2. Throws for odd or zero d.
std::vector<double> rope_angles(std::size_t d, double base = 10000.0);

/// Rotation frequencies with cos/sin of m * theta_i cached for m < max_len.
/// Positions past the cache are computed on demand.
class RotaryTable {
 public:
  RotaryTable(std::size_t d, double base, std::size_t max_len);

  std::size_t dim() const { return 2 * thetas_.size(); }
  std::size_t cached_len() const { return max_len_; }
  std::span<const double> thetas() const { return thetas_; }
  double cos(std::size_t m, std::size_t block) const;
  double sin(std::size_t m, std::size_t block) const;

 private:
  std::vector<double> thetas_;
  std::size_t max_len_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

/// Per-position rotation direction: -1 exactly at switching points.
class SignPattern {
 public:
  SignPattern() = default;
  /// Every flag must be +1 or -1.
  static SignPattern from_flags(std::vector<int> flags);
  static SignPattern all_positive(std::size_t n) { return SignPattern(std::vector<int>(n, 1)); }

  std::size_t size() const { return flags_.size(); }
  int operator[](std::size_t i) const { return flags_[i]; }
  std::span<const int> flags() const { return flags_; }
  bool any_negative() const;

 private:
  explicit SignPattern(std::vector<int> flags) : flags_(std::move(flags)) {}
  std::vector<int> flags_;
};

/// Flags -1 at each switching point and +1 elsewhere (including the run that
/// follows a switch). Throws std::invalid_argument if an index is 0 or
/// >= seq_len.
SignPattern build_spm(std::span<const std::size_t> sp_indices, std::size_t seq_len);

/// Row-major 2x2 block [[a, b], [c, d]].
using Block2 = std::array<double, 4>;

/// The 2x2 block acting on dimensions (2i, 2i+1) at position m for a flag.
Block2 rotation_block(const RotaryTable& table, std::size_t m, std::size_t block, int sign, SprmMode mode);

/// Effective per-position rotation blocks: position i, block k.
using Sprm = std::vector<std::vector<Block2>>;

/// RM blocks where the flag is +1; transposed (or negated, in Negate mode)
/// blocks where the flag is -1. Position index equals the pattern index.
Sprm build_sprm(const SignPattern& sign, const RotaryTable& table, SprmMode mode = SprmMode::Transpose);

/// Rotates consecutive pairs (x[2i], x[2i+1]) by sign * m * theta_i.
std::vector<double> apply_rotary(std::span<const double> x, std::size_t m, const RotaryTable& table, int sign = 1,
                                 SprmMode mode = SprmMode::Transpose);

/// Differentiable rotary transform of every row of `x` (T x W). Row i uses
/// position positions[i] and flag sign[i] (all +1 when `sign` is null). W
/// must be a multiple of table.dim(); each table.dim()-wide segment (one
/// attention head) is rotated independently with the same frequencies.
nn::Var rotate_rows(const nn::Var& x, std::span<const int> positions, const SignPattern* sign,
                    const RotaryTable& table, SprmMode mode = SprmMode::Transpose);

}  // namespace cmlab::posenc
