#include "ham/nn/mlp.hpp"

namespace ham::nn {

namespace {

std::vector<Eigen::Index> layer_widths(const MlpSpec& spec) {
  std::vector<Eigen::Index> widths{spec.input_width};
  widths.insert(widths.end(), spec.hidden_widths.begin(), spec.hidden_widths.end());
  widths.push_back(spec.output_width);
  return widths;
}

std::string layer_name(const std::string& prefix, std::size_t i, const char* what) {
  return prefix + "/layer" + std::to_string(i) + "/" + what;
}

}  // namespace

void MlpSpec::validate() const {
  if (hidden_widths.empty() || hidden_widths.size() > 2) {
    throw DimensionError("MLP must have one or two hidden layers, got " +
                         std::to_string(hidden_widths.size()));
  }
  if (input_width <= 0 || output_width <= 0) throw DimensionError("MLP widths must be positive");
  for (auto w : hidden_widths) {
    if (w <= 0) throw DimensionError("MLP widths must be positive");
  }
}

Mlp Mlp::create(ParameterStore& store, const std::string& prefix, const MlpSpec& spec,
                Rng& rng) {
  spec.validate();
  const auto widths = layer_widths(spec);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    Parameter& w = store.add(layer_name(prefix, i, "weight"), widths[i + 1], widths[i]);
    store.add(layer_name(prefix, i, "bias"), widths[i + 1], 1);
    glorot_uniform(w.value, rng);
  }
  return bind(store, prefix, spec);
}

Mlp Mlp::bind(ParameterStore& store, const std::string& prefix, const MlpSpec& spec) {
  spec.validate();
  Mlp mlp;
  mlp.spec_ = spec;
  const auto widths = layer_widths(spec);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    Parameter& w = store.at(layer_name(prefix, i, "weight"));
    Parameter& b = store.at(layer_name(prefix, i, "bias"));
    if (w.value.rows() != widths[i + 1] || w.value.cols() != widths[i] ||
        b.value.rows() != widths[i + 1] || b.value.cols() != 1) {
      throw ConfigError("shape mismatch for " + prefix + " layer " + std::to_string(i));
    }
    mlp.layers_.emplace_back(&w, &b);
  }
  return mlp;
}

Var Mlp::operator()(Var input) const {
  if (input.size() != spec_.input_width) {
    throw DimensionError("MLP expects input width " + std::to_string(spec_.input_width) +
                         ", got " + std::to_string(input.size()));
  }
  Var h = input;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    h = relu(affine(*layers_[i].first, *layers_[i].second, h));
  }
  Var out = affine(*layers_.back().first, *layers_.back().second, h);
  switch (spec_.output_activation) {
    case Activation::kLinear: return out;
    case Activation::kSigmoid: return sigmoid(out);
    case Activation::kRelu: return relu(out);
  }
  return out;
}

Vector mlp_forward(const MlpSpec& spec, ParameterStore& params, const std::string& prefix,
                   const Vector& input) {
  const Mlp mlp = Mlp::bind(params, prefix, spec);
  Tape tape;
  return mlp(tape.constant(input)).value();
}

}  // namespace ham::nn
