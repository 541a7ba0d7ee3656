#include "ham/nn/parameters.hpp"

#include <cmath>

namespace ham::nn {

Parameter& ParameterStore::add(const std::string& name, Eigen::Index rows,
                               Eigen::Index cols) {
  if (rows <= 0 || cols <= 0) {
    throw DimensionError("parameter '" + name + "' must have positive shape");
  }
  auto [it, inserted] = params_.try_emplace(name);
  if (!inserted) throw UsageError("duplicate parameter name '" + name + "'");
  it->second.value = Matrix::Zero(rows, cols);
  it->second.grad = Matrix::Zero(rows, cols);
  return it->second;
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

void ParameterStore::zero_grad() {
  for (auto& [name, p] : params_) p.grad.setZero();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [name, p] : params_) total += static_cast<std::size_t>(p.value.size());
  return total;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

void ParameterStore::assign_values(const ParameterStore& other) {
  if (other.size() != size()) {
    throw ConfigError("parameter count mismatch: " + std::to_string(other.size()) +
                      " vs " + std::to_string(size()));
  }
  for (auto& [name, p] : params_) {
    auto it = other.params_.find(name);
    if (it == other.params_.end()) throw ConfigError("missing parameter '" + name + "'");
    if (it->second.value.rows() != p.value.rows() ||
        it->second.value.cols() != p.value.cols()) {
      throw ConfigError("shape mismatch for parameter '" + name + "'");
    }
    p.value = it->second.value;
  }
}

void glorot_uniform(Matrix& weight, Rng& rng) {
  const Scalar r = std::sqrt(6.0 / static_cast<Scalar>(weight.rows() + weight.cols()));
  for (Eigen::Index i = 0; i < weight.rows(); ++i) {
    for (Eigen::Index j = 0; j < weight.cols(); ++j) {
      weight(i, j) = (2.0 * uniform01(rng) - 1.0) * r;
    }
  }
}

Scalar grad_norm(const ParameterStore& store) {
  Scalar sq = 0;
  for (const auto& [name, p] : store) sq += p.grad.squaredNorm();
  return std::sqrt(sq);
}

Scalar clip_global_norm(ParameterStore& store, Scalar c) {
  const Scalar norm = grad_norm(store);
  if (norm > c) {
    const Scalar scale = c / norm;
    for (auto& [name, p] : store) p.grad *= scale;
  }
  return norm;
}

}  // namespace ham::nn
