#include "cmlab/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmlab/util/errors.hpp"

namespace cmlab::nn {

void adam_step(ParamStore& params, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
  for (auto& [name, p] : params.entries()) {
    if (p.has_grad() && !p.grad().all_finite())
      throw NumericalError("adam_step: non-finite gradient in parameter '" + name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (auto& [name, p] : params.entries()) {
    Tensor& w = p.mutable_value();
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.empty()) m = Tensor(w.rows(), w.cols());
    if (v.empty()) v = Tensor(w.rows(), w.cols());
    if (!m.same_shape(w) || !v.same_shape(w))
      throw std::invalid_argument("adam_step: moment shape mismatch for '" + name + "'");
    const bool has = p.has_grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double g = has ? p.grad()[i] : 0.0;
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

double warmup_lr(std::int64_t step, const LRSchedule& schedule) {
  if (step < 1) throw std::invalid_argument("warmup_lr: step must be >= 1");
  if (schedule.d_model <= 0 || schedule.warmup_steps <= 0)
    throw std::invalid_argument("warmup_lr: d_model and warmup_steps must be positive");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(schedule.warmup_steps);
  return std::pow(static_cast<double>(schedule.d_model), -0.5) * std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

}  // namespace cmlab::nn
