#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cmlab/nn/autograd.hpp"

namespace cmlab {
class Rng;
}

namespace cmlab::nn {

// Differentiable primitives over 2-D values. Shape violations throw
// std::invalid_argument.

Var matmul(const Var& a, const Var& b);     // a * b
Var matmul_nt(const Var& a, const Var& b);  // a * b^T
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var add_row(const Var& a, const Var& row);  // broadcast a 1 x c row over every row of a
Var scale(const Var& a, double s);
Var scale_by(const Var& a, const Var& scalar);  // scalar is 1 x 1 and receives a gradient
Var relu(const Var& a);

/// Row-wise softmax. With `causal`, entry (i, j) for j > i gets probability 0.
Var softmax_rows(const Var& a, bool causal = false);

/// Normalizes each row to zero mean and unit variance, then applies
/// gamma * x + beta (both 1 x c).
Var layer_norm(const Var& a, const Var& gamma, const Var& beta, double eps = 1e-5);

/// Row lookup: out[i] = table[ids[i]]. Gradients scatter-add back.
Var gather_rows(const Var& table, std::span<const int> ids);

Var slice_cols(const Var& a, std::size_t start, std::size_t len);
Var concat_cols(const std::vector<Var>& parts);

/// Pads with zero rows up to `total_rows`, at the front or the back.
Var pad_rows(const Var& a, std::size_t total_rows, bool at_front);

/// Inverted dropout: kept entries are scaled by 1 / (1 - p). Identity when
/// p == 0 or !training.
Var dropout(const Var& a, double p, Rng& rng, bool training);

/// Sum over rows of -log softmax(logits)[target]. Rows with target < 0 are
/// ignored. Returns a 1 x 1 value.
Var cross_entropy_sum(const Var& logits, std::span<const int> targets);

Var mean_rows(const Var& a, std::size_t count);  // mean of the first `count` rows, 1 x c
Var sum_all(const Var& a);
Var weighted_sum(const Var& a, const Tensor& weights);  // sum(a .* weights), 1 x 1

/// Non-differentiable helper: log-softmax of each row.
Tensor log_softmax_rows(const Tensor& logits);

}  // namespace cmlab::nn
