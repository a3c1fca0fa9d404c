#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "cmlab/nn/params.hpp"

namespace cmlab::nn {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  std::uint64_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

/// One bias-corrected Adam update over every parameter in the store.
/// Parameters without an accumulated gradient are treated as having a zero
/// gradient. Throws NumericalError naming the parameter if a gradient is not
/// finite, std::invalid_argument if lr <= 0 or moment shapes disagree.
void adam_step(ParamStore& params, AdamState& state, double lr);

struct LRSchedule {
  int d_model = 512;
  int warmup_steps = 4000;
};

/// d_model^-0.5 * min(step^-0.5, step * warmup^-1.5); step >= 1.
double warmup_lr(std::int64_t step, const LRSchedule& schedule);

}  // namespace cmlab::nn
