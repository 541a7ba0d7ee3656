#pragma once

#include "ham/nn/parameters.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace ham::nn {

struct AdamState {
  std::int64_t step_count = 0;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar epsilon = 1e-8;
  std::map<std::string, Matrix> first_moment;
  std::map<std::string, Matrix> second_moment;
};

/// Bias-corrected Adam update of every parameter from its gradient. Moments
/// are created lazily with the parameter shapes. Throws NumericalError naming
/// the first parameter whose gradient is not finite; nothing is updated then.
void adam_step(ParameterStore& params, AdamState& adam, Scalar lr);

}  // namespace ham::nn
