#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cmlab/nn/autograd.hpp"
#include "cmlab/nn/gradcheck.hpp"

namespace cmlab::model {

/// A differentiable function and the leaves it is checked against.
struct GradCase {
  std::string name;
  std::function<nn::Var()> f;
  std::vector<std::pair<std::string, nn::Var>> leaves;
};

/// Every positional kernel's logits (d = 8, seq = 6) plus the full one-layer
/// stack for every variant, the two-stream encoder, the classifier and the
/// encoder-decoder. All values are drawn from `seed`; dropout is off.
std::vector<GradCase> gradient_suite(std::uint64_t seed);

struct GradCaseResult {
  std::string name;
  nn::GradCheckReport report;
};

std::vector<GradCaseResult> run_gradient_suite(std::uint64_t seed, const nn::GradCheckOptions& options = {});

}  // namespace cmlab::model
