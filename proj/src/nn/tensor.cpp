#include "cmlab/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmlab::nn {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("Tensor: value count does not match shape");
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Tensor::from_rows: ragged rows");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(v));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double Tensor::max_abs_diff(const Tensor& o) const {
  if (!same_shape(o)) throw std::invalid_argument("Tensor::max_abs_diff: shape mismatch");
  double m = 0;
  for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - o.data_[i]));
  return m;
}

}  // namespace cmlab::nn
