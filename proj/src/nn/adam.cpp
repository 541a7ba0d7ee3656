#include "ham/nn/adam.hpp"

#include <cmath>

namespace ham::nn {

void adam_step(ParameterStore& params, AdamState& adam, Scalar lr) {
  for (const auto& [name, p] : params) {
    if (!p.grad.allFinite()) throw NumericalError("non-finite gradient for parameter '" + name + "'");
  }
  ++adam.step_count;
  const Scalar correction1 = 1.0 - std::pow(adam.beta1, static_cast<Scalar>(adam.step_count));
  const Scalar correction2 = 1.0 - std::pow(adam.beta2, static_cast<Scalar>(adam.step_count));
  for (auto& [name, p] : params) {
    auto [m_it, m_new] = adam.first_moment.try_emplace(name);
    auto [v_it, v_new] = adam.second_moment.try_emplace(name);
    Matrix& m = m_it->second;
    Matrix& v = v_it->second;
    if (m_new || m.rows() != p.value.rows() || m.cols() != p.value.cols()) {
      m = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    if (v_new || v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    m = adam.beta1 * m + (1.0 - adam.beta1) * p.grad;
    v = adam.beta2 * v + (1.0 - adam.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (m.array() / correction1) /
                       ((v.array() / correction2).sqrt() + adam.epsilon);
  }
}

}  // namespace ham::nn
