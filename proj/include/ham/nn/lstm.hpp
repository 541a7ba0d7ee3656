#pragma once

#include "ham/nn/parameters.hpp"
#include "ham/nn/tape.hpp"

#include <string>

namespace ham::nn {

struct LstmState {
  Var hidden;
  Var cell;
};

/// Vanilla LSTM cell without peepholes. One fused affine map produces the
/// pre-activations of the input, forget, candidate and output gates, in that
/// order, from concat(input, hidden).
class Lstm {
 public:
  Lstm() = default;

  static Lstm create(ParameterStore& store, const std::string& prefix, Eigen::Index input_width,
                     Eigen::Index width, Rng& rng);
  static Lstm bind(ParameterStore& store, const std::string& prefix, Eigen::Index input_width,
                   Eigen::Index width);

  LstmState zero_state(Tape& tape) const;
  LstmState step(const LstmState& state, Var input) const;

  Eigen::Index input_width() const { return input_width_; }
  Eigen::Index width() const { return width_; }
  Parameter& weight() const { return *weight_; }
  Parameter& bias() const { return *bias_; }

 private:
  Eigen::Index input_width_ = 0;
  Eigen::Index width_ = 0;
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
};

}  // namespace ham::nn
