#include "ham/nn/lstm.hpp"

namespace ham::nn {

Lstm Lstm::create(ParameterStore& store, const std::string& prefix, Eigen::Index input_width,
                  Eigen::Index width, Rng& rng) {
  Parameter& w = store.add(prefix + "/weight", 4 * width, input_width + width);
  store.add(prefix + "/bias", 4 * width, 1);
  glorot_uniform(w.value, rng);
  return bind(store, prefix, input_width, width);
}

Lstm Lstm::bind(ParameterStore& store, const std::string& prefix, Eigen::Index input_width,
                Eigen::Index width) {
  Lstm lstm;
  lstm.input_width_ = input_width;
  lstm.width_ = width;
  lstm.weight_ = &store.at(prefix + "/weight");
  lstm.bias_ = &store.at(prefix + "/bias");
  if (lstm.weight_->value.rows() != 4 * width ||
      lstm.weight_->value.cols() != input_width + width || lstm.bias_->value.rows() != 4 * width) {
    throw ConfigError("shape mismatch for LSTM '" + prefix + "'");
  }
  return lstm;
}

LstmState Lstm::zero_state(Tape& tape) const {
  return {tape.constant(Vector::Zero(width_)), tape.constant(Vector::Zero(width_))};
}

LstmState Lstm::step(const LstmState& state, Var input) const {
  if (input.size() != input_width_) {
    throw DimensionError("LSTM expects input width " + std::to_string(input_width_) + ", got " +
                         std::to_string(input.size()));
  }
  if (state.hidden.size() != width_ || state.cell.size() != width_) {
    throw DimensionError("LSTM state width mismatch");
  }
  const Var z = affine(*weight_, *bias_, concat(input, state.hidden));
  const Var in_gate = sigmoid(slice(z, 0, width_));
  const Var forget_gate = sigmoid(slice(z, width_, width_));
  const Var candidate = tanh(slice(z, 2 * width_, width_));
  const Var out_gate = sigmoid(slice(z, 3 * width_, width_));
  const Var cell = forget_gate * state.cell + in_gate * candidate;
  return {out_gate * tanh(cell), cell};
}

}  // namespace ham::nn
