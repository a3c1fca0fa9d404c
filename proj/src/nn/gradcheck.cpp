#include "cmlab/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "cmlab/nn/ops.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::nn {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<Var()>& f, const std::vector<std::pair<std::string, Var>>& params,
                           const GradCheckOptions& options) {
  Var probe = f();
  Tensor weights(probe.rows(), probe.cols(), 1.0);
  if (weights.size() != 1) {
    Rng rng(options.projection_seed);
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = rng.uniform(-1.0, 1.0);
  }
  auto objective = [&] { return weighted_sum(f(), weights).value()[0]; };

  std::vector<Var> leaves;
  for (const auto& [name, v] : params) {
    leaves.push_back(v);
    leaves.back().zero_grad();
  }
  weighted_sum(f(), weights).backward();
  std::vector<Tensor> analytic;
  for (const auto& v : leaves)
    analytic.push_back(v.has_grad() ? v.grad() : Tensor(v.rows(), v.cols()));

  auto central = [&](Var& leaf, std::size_t i, double eps) {
    double& x = leaf.mutable_value()[i];
    const double orig = x;
    x = orig + eps;
    const double fp = objective();
    x = orig - eps;
    const double fm = objective();
    x = orig;
    return (fp - fm) / (2.0 * eps);
  };
  // Gap between forward and backward one-sided slopes. It shrinks linearly
  // with eps where f is smooth and stays put at a kink.
  auto one_sided_gap = [&](Var& leaf, std::size_t i, double eps) {
    double& x = leaf.mutable_value()[i];
    const double orig = x;
    const double f0 = objective();
    x = orig + eps;
    const double fp = objective();
    x = orig - eps;
    const double fm = objective();
    x = orig;
    return std::abs((fp - f0) / eps - (f0 - fm) / eps);
  };
  auto is_kink = [&](Var& leaf, std::size_t i) {
    const double coarse = one_sided_gap(leaf, i, options.eps);
    const double fine = one_sided_gap(leaf, i, options.eps / 10.0);
    return coarse > 1e-6 && fine > 0.5 * coarse;
  };

  GradCheckReport report;
  for (std::size_t b = 0; b < leaves.size(); ++b) {
    GradCheckBlock block;
    block.name = params[b].first;
    Var leaf = leaves[b];
    for (std::size_t i = 0; i < leaf.value().size(); ++i) {
      const double a = analytic[b][i];
      const double n = central(leaf, i, options.eps);
      double err = relative_error(a, n);
      ++block.checked;
      if (err > options.tolerance) {
        if (is_kink(leaf, i)) {
          ++block.nondifferentiable;
          continue;
        }
        ++block.failures;
      }
      block.max_rel_error = std::max(block.max_rel_error, err);
    }
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    if (block.failures) report.passed = false;
    report.blocks.push_back(std::move(block));
  }
  for (auto& v : leaves) v.zero_grad();
  return report;
}

}  // namespace cmlab::nn
