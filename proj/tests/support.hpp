#pragma once

#include "ham/nn/parameters.hpp"
#include "ham/nn/tape.hpp"
#include "ham/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace ham::test {

/// Adds uniform noise to every parameter. Moves biases off zero so that no
/// ReLU sits exactly on its kink during finite differencing.
inline void jitter(nn::ParameterStore& store, Rng& rng, double scale) {
  for (auto& [name, p] : store) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += scale * (uniform01(rng) - 0.5);
  }
}

inline nn::Vector random_vector(Eigen::Index n, Rng& rng, double lo = -1, double hi = 1) {
  nn::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = lo + (hi - lo) * uniform01(rng);
  return v;
}

struct FdResult {
  double worst_tensor = 0;   // max over parameters of |a - n| / max(|a| + |n|, tiny), L2 norms
  double worst_element = 0;  // max over scalars of |a - n| / max(|a|, |n|, floor)
  std::string worst_name;
  std::size_t checked = 0;
};

using LossFn = std::function<nn::Var(nn::Tape&)>;

/// Central differences with step h against one backward pass.
inline FdResult finite_difference_check(nn::ParameterStore& store, const LossFn& loss,
                                        double h = 1e-5, double floor = 1e-4) {
  nn::Tape tape;
  store.zero_grad();
  tape.backward(loss(tape));
  FdResult r;
  for (auto& [name, p] : store) {
    const nn::Matrix analytic = p.grad;
    nn::Matrix numeric(p.value.rows(), p.value.cols());
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      const double saved = x;
      x = saved + h;
      tape.clear();
      const double up = loss(tape).scalar();
      x = saved - h;
      tape.clear();
      const double down = loss(tape).scalar();
      x = saved;
      numeric.data()[i] = (up - down) / (2 * h);
      const double a = analytic.data()[i];
      const double n = numeric.data()[i];
      const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
      if (rel > r.worst_element) r.worst_element = rel;
      ++r.checked;
    }
    const double denom = std::max(analytic.norm() + numeric.norm(), 1e-300);
    const double rel = (analytic - numeric).norm() / denom;
    if (rel > r.worst_tensor) {
      r.worst_tensor = rel;
      r.worst_name = name;
    }
  }
  tape.clear();
  return r;
}

}  // namespace ham::test
