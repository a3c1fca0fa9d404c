#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cmlab/nn/autograd.hpp"

namespace cmlab::nn {

struct GradCheckOptions {
  double eps = 1e-4;
  double tolerance = 1e-4;
  /// Non-scalar outputs are reduced to sum(out .* W) with W drawn from this seed.
  std::uint64_t projection_seed = 0x5eed;
};

struct GradCheckBlock {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t failures = 0;
  /// Entries where the one-sided slopes disagree by an amount that does not
  /// shrink with eps (a kink such as relu at 0). Reported, not counted as
  /// failures.
  std::size_t nondifferentiable = 0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// |a - n| / max(|a|, |n|, 1e-6)
double relative_error(double analytic, double numeric);

/// Compares reverse-mode gradients of `f` with central differences
/// (f(p + eps) - f(p - eps)) / 2 eps for every entry of every listed leaf.
/// `f` must rebuild its graph from the current leaf values on each call.
GradCheckReport grad_check(const std::function<Var()>& f, const std::vector<std::pair<std::string, Var>>& params,
                           const GradCheckOptions& options = {});

}  // namespace cmlab::nn
