#pragma once

#include "ham/nn/parameters.hpp"
#include "ham/nn/tape.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ham::nn {

enum class Activation { kLinear, kSigmoid, kRelu };

struct MlpSpec {
  Eigen::Index input_width = 0;
  std::vector<Eigen::Index> hidden_widths;  // one or two hidden layers
  Eigen::Index output_width = 0;
  Activation output_activation = Activation::kLinear;

  /// Throws DimensionError on a non-positive width or a depth outside {1, 2}.
  void validate() const;
};

/// Feed-forward network whose hidden layers are affine + ReLU and whose output
/// layer is affine + `output_activation`. Holds handles into a ParameterStore;
/// parameters live under "<prefix>/layer<i>/{weight,bias}".
class Mlp {
 public:
  Mlp() = default;

  /// Registers and initializes the layer parameters.
  static Mlp create(ParameterStore& store, const std::string& prefix, const MlpSpec& spec,
                    Rng& rng);
  /// Attaches to parameters that already exist, checking every shape.
  static Mlp bind(ParameterStore& store, const std::string& prefix, const MlpSpec& spec);

  Var operator()(Var input) const;

  const MlpSpec& spec() const { return spec_; }
  std::size_t layer_count() const { return layers_.size(); }
  Parameter& weight(std::size_t layer) const { return *layers_.at(layer).first; }
  Parameter& bias(std::size_t layer) const { return *layers_.at(layer).second; }

 private:
  MlpSpec spec_;
  std::vector<std::pair<Parameter*, Parameter*>> layers_;
};

/// Evaluates the network stored under `prefix` on a plain vector.
Vector mlp_forward(const MlpSpec& spec, ParameterStore& params, const std::string& prefix,
                   const Vector& input);

}  // namespace ham::nn
