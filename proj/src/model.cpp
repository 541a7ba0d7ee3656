#include "ham/model.hpp"

namespace ham {

namespace {

HamSpec ham_spec(const ModelConfig& c) {
  HamSpec s;
  s.input_width = c.b_in;
  s.hidden_width = c.d;
  s.query_width = c.query_width();
  s.mlp_hidden = c.mlp_hidden;
  s.mlp_depth = c.mlp_depth;
  return s;
}

nn::MlpSpec raw_output_spec(const ModelConfig& c) {
  nn::MlpSpec s;
  s.input_width = c.d;
  s.hidden_widths.assign(static_cast<std::size_t>(c.mlp_depth), c.mlp_hidden);
  s.output_width = c.b;
  s.output_activation = nn::Activation::kLinear;
  return s;
}

nn::Vector probabilities(const nn::Vector& logits) {
  return logits.unaryExpr([](nn::Scalar u) { return nn::sigmoid(u); });
}

}  // namespace

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config), params_(seed) {
  config_.validate();
  build(seed);
}

Model::Model(const ModelConfig& config, const nn::ParameterStore& params)
    : config_(config), params_(params.rng_seed()) {
  config_.validate();
  build(params.rng_seed());
  params_.assign_values(params);
}

Model::Model(const Model& other) : config_(other.config_), params_(other.params_) { bind(); }

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    config_ = other.config_;
    params_ = other.params_;
    bind();
  }
  return *this;
}

Model::Model(Model&& other) noexcept
    : config_(other.config_), params_(std::move(other.params_)) {
  bind();
}

Model& Model::operator=(Model&& other) noexcept {
  if (this != &other) {
    config_ = other.config_;
    params_ = std::move(other.params_);
    bind();
  }
  return *this;
}

void Model::build(std::uint64_t seed) {
  Rng rng(seed);
  HamNetworks::create(params_, "ham", ham_spec(config_), rng);
  if (config_.mode == ModelMode::kController) {
    nn::Lstm::create(params_, "controller/lstm", config_.d, config_.l, rng);
    nn::Parameter& w = params_.add("controller/output/weight", config_.b + 1, config_.l);
    params_.add("controller/output/bias", config_.b + 1, 1);
    nn::glorot_uniform(w.value, rng);
  } else {
    nn::Mlp::create(params_, "raw/output", raw_output_spec(config_), rng);
  }
  nn::Parameter& bw = params_.add("baseline/weight", 1, baseline_width());
  params_.add("baseline/bias", 1, 1);
  nn::glorot_uniform(bw.value, rng);
  bind();
}

void Model::bind() {
  ham_ = HamNetworks::bind(params_, "ham", ham_spec(config_));
  if (config_.mode == ModelMode::kController) {
    lstm_ = nn::Lstm::bind(params_, "controller/lstm", config_.d, config_.l);
    output_weight_ = &params_.at("controller/output/weight");
    output_bias_ = &params_.at("controller/output/bias");
  } else {
    raw_output_ = nn::Mlp::bind(params_, "raw/output", raw_output_spec(config_));
  }
  baseline_weight_ = &params_.at("baseline/weight");
  baseline_bias_ = &params_.at("baseline/bias");
}

Model Model::with_capacity(int leaf_count) const {
  Model copy(*this);
  copy.config_.n = leaf_count;
  copy.config_.validate();
  return copy;
}

void Model::set_capacity(int leaf_count) {
  ModelConfig c = config_;
  c.n = leaf_count;
  c.validate();
  config_ = c;
}

const nn::Lstm& Model::lstm() const {
  if (config_.mode != ModelMode::kController) throw UsageError("raw mode has no controller");
  return lstm_;
}

int Model::output_width() const {
  return config_.mode == ModelMode::kController ? config_.b + 1 : config_.b;
}

int Model::baseline_width() const {
  return config_.mode == ModelMode::kController ? config_.l : config_.b_in + config_.d;
}

nn::Var Model::output_logits(nn::Var features) const {
  if (config_.mode == ModelMode::kController) return nn::affine(*output_weight_, *output_bias_, features);
  return raw_output_(features);
}

nn::Var Model::baseline(nn::Var features) const {
  return nn::affine(*baseline_weight_, *baseline_bias_, features);
}

std::vector<nn::Vector> encode_inputs(const ModelConfig& config, const tasks::Example& example) {
  for (const auto& v : example.inputs) {
    if (v.size() != config.b_in) {
      throw ConfigError("input symbol width " + std::to_string(v.size()) +
                        " does not match model b_in " + std::to_string(config.b_in));
    }
  }
  for (const auto& t : example.targets) {
    const auto expected = static_cast<std::size_t>(
        config.mode == ModelMode::kController ? config.b + 1 : config.b);
    if (t.size() != expected) throw ConfigError("target width does not match the model");
  }
  return example.inputs;
}

ModelState initial_state(const Model& model, nn::Tape& tape, std::span<const nn::Vector> inputs) {
  const ModelConfig& c = model.config();
  if (c.mode != ModelMode::kController) throw UsageError("initial_state needs controller mode");
  ModelState state{model.lstm().zero_state(tape), init_memory(tape, model.ham(), inputs, c.n), 0};
  return state;
}

ModelState initial_raw_state(const Model& model, nn::Tape& tape) {
  const ModelConfig& c = model.config();
  if (c.mode != ModelMode::kRaw) throw UsageError("initial_raw_state needs raw mode");
  return ModelState{{}, TreeMemory(tape, c.n, c.d), 0};
}

std::optional<nn::Var> step(const Model& model, ModelState& state, const AttentionMode& mode,
                            EpisodeOutput& log) {
  const ModelConfig& c = model.config();
  if (c.mode != ModelMode::kController) throw UsageError("step() needs controller mode");
  TreeMemory& mem = state.memory;
  const nn::Var query = state.lstm.hidden;

  std::optional<AttentionTrace> trace;
  std::optional<LeafDistribution> dist;
  nn::Var read;
  if (c.attention == Attention::kHard) {
    trace = attend(mem, model.ham(), query, mode);
    read = read_leaf(mem, *trace);
  } else {
    dist = leaf_distribution(mem, model.ham(), query);
    read = soft_read(mem, *dist);
  }

  state.lstm = model.lstm().step(state.lstm, read);
  const nn::Var h = state.lstm.hidden;

  std::optional<nn::Var> emitted;
  log.step_window.push_back(state.step_index / c.eta);
  if ((state.step_index + 1) % c.eta == 0) {
    emitted = model.output_logits(h);
    log.logits.push_back(*emitted);
    log.bit_probs.push_back(probabilities(emitted->value()));
    log.baseline_features.push_back(nn::stop_gradient(h));
  }

  if (trace) {
    write_update(mem, model.ham(), *trace, h);
    log.traces.push_back(std::move(*trace));
  } else {
    const nn::Var write_query = c.dham_write_query == WriteQuery::kController ? h : mem.node(1);
    soft_write(mem, model.ham(), *dist, write_query);
    log.distributions.push_back(std::move(*dist));
  }
  ++state.step_index;
  ++log.attention_steps;
  return emitted;
}

nn::Var raw_step(const Model& model, ModelState& state, const nn::Vector& op,
                 const AttentionMode& mode, EpisodeOutput& log) {
  const ModelConfig& c = model.config();
  if (c.mode != ModelMode::kRaw) throw UsageError("raw_step() needs raw mode");
  if (op.size() != c.b_in) throw DimensionError("operation symbol width mismatch");
  TreeMemory& mem = state.memory;
  nn::Tape& tape = mem.tape();
  const nn::Var query = tape.constant(op);
  log.baseline_features.push_back(nn::stop_gradient(nn::concat(query, mem.node(1))));

  nn::Var read;
  if (c.attention == Attention::kHard) {
    AttentionTrace trace = attend(mem, model.ham(), query, mode);
    read = read_leaf(mem, trace);
    const nn::Var logits = model.output_logits(read);
    log.logits.push_back(logits);
    write_update(mem, model.ham(), trace, query);
    log.traces.push_back(std::move(trace));
  } else {
    LeafDistribution dist = leaf_distribution(mem, model.ham(), query);
    read = soft_read(mem, dist);
    log.logits.push_back(model.output_logits(read));
    soft_write(mem, model.ham(), dist, c.dham_write_query == WriteQuery::kController ? query : mem.node(1));
    log.distributions.push_back(std::move(dist));
  }
  log.bit_probs.push_back(probabilities(log.logits.back().value()));
  log.step_window.push_back(state.step_index);
  ++state.step_index;
  ++log.attention_steps;
  return log.logits.back();
}

EpisodeOutput run_episode(const Model& model, nn::Tape& tape, std::span<const nn::Vector> inputs,
                          const AttentionMode& mode, const EpisodeOptions& options) {
  const ModelConfig& c = model.config();
  EpisodeOutput out;
  if (c.mode == ModelMode::kRaw) {
    ModelState state = initial_raw_state(model, tape);
    for (const auto& op : inputs) {
      raw_step(model, state, op, mode, out);
      if (options.dump_nodes) out.node_dumps.push_back(state.memory.snapshot());
    }
    out.counters = state.memory.counters();
    return out;
  }
  if (static_cast<int>(inputs.size()) > c.n) {
    throw CapacityError("input of length " + std::to_string(inputs.size()) +
                        " exceeds capacity " + std::to_string(c.n));
  }
  ModelState state = initial_state(model, tape, inputs);
  while (static_cast<int>(out.logits.size()) < options.max_outputs) {
    const auto emitted = step(model, state, mode, out);
    if (options.dump_nodes) out.node_dumps.push_back(state.memory.snapshot());
    if (emitted && options.stop_at_end && out.bit_probs.back()(c.b) > 0.5) break;
  }
  out.counters = state.memory.counters();
  return out;
}

tasks::Bits round_bits(const nn::Vector& probs) {
  tasks::Bits bits(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index j = 0; j < probs.size(); ++j) bits[static_cast<std::size_t>(j)] = probs(j) > 0.5;
  return bits;
}

Prediction predict_with_trace(const Model& model, nn::Tape& tape,
                              std::span<const nn::Vector> inputs, bool dump_nodes) {
  const ModelConfig& c = model.config();
  EpisodeOptions options;
  options.max_outputs = c.n + 1;
  options.stop_at_end = true;
  options.dump_nodes = dump_nodes;
  Prediction p{{}, run_episode(model, tape, inputs, GreedyMode{}, options)};
  for (const auto& probs : p.episode.bit_probs) {
    tasks::Bits bits = round_bits(probs);
    if (c.mode == ModelMode::kController) {
      if (bits.back() == 1) break;
      bits.pop_back();
    }
    p.symbols.push_back(std::move(bits));
  }
  return p;
}

std::vector<tasks::Bits> predict(const Model& model, std::span<const nn::Vector> inputs) {
  thread_local nn::Tape tape;
  tape.clear();
  auto symbols = predict_with_trace(model, tape, inputs).symbols;
  tape.clear();
  return symbols;
}

}  // namespace ham
