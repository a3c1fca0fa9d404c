#include "cmlab/nn/params.hpp"

#include <stdexcept>

#include "cmlab/util/rng.hpp"

namespace cmlab::nn {

Var& ParamStore::add(std::string name, Tensor init) {
  if (contains(name)) throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
  entries_.emplace_back(std::move(name), parameter(std::move(init)));
  return entries_.back().second;
}

Var& ParamStore::get(std::string_view name) {
  for (auto& [n, v] : entries_)
    if (n == name) return v;
  throw std::out_of_range("ParamStore: no parameter '" + std::string(name) + "'");
}

const Var& ParamStore::get(std::string_view name) const {
  for (const auto& [n, v] : entries_)
    if (n == name) return v;
  throw std::out_of_range("ParamStore: no parameter '" + std::string(name) + "'");
}

bool ParamStore::contains(std::string_view name) const {
  for (const auto& [n, v] : entries_)
    if (n == name) return true;
  return false;
}

void ParamStore::zero_grad() {
  for (auto& [n, v] : entries_) v.zero_grad();
}

std::size_t ParamStore::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [n, v] : entries_) total += v.value().size();
  return total;
}

Tensor uniform_init(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

}  // namespace cmlab::nn
