#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmlab/nn/autograd.hpp"

namespace cmlab {
class Rng;
}

namespace cmlab::nn {

/// Named trainable leaves in insertion order.
class ParamStore {
 public:
  Var& add(std::string name, Tensor init);
  Var& get(std::string_view name);
  const Var& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<std::pair<std::string, Var>>& entries() { return entries_; }
  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }

  void zero_grad();
  std::size_t parameter_count() const;

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

/// Symmetric uniform in [-bound, bound].
Tensor uniform_init(std::size_t rows, std::size_t cols, double bound, Rng& rng);

}  // namespace cmlab::nn
