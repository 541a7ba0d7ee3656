#include "ham/memory.hpp"

#include <cmath>
#include <type_traits>

namespace ham {

namespace {

nn::MlpSpec mlp_spec(const HamSpec& spec, Eigen::Index in, Eigen::Index out,
                     nn::Activation activation) {
  nn::MlpSpec s;
  s.input_width = in;
  s.hidden_widths.assign(static_cast<std::size_t>(spec.mlp_depth), spec.mlp_hidden);
  s.output_width = out;
  s.output_activation = activation;
  return s;
}

struct NetSpecs {
  nn::MlpSpec embed, join, search, write_h, write_t;
};

NetSpecs net_specs(const HamSpec& spec) {
  const auto d = spec.hidden_width;
  const auto q = spec.query_width;
  return {mlp_spec(spec, spec.input_width, d, nn::Activation::kRelu),
          mlp_spec(spec, 2 * d, d, nn::Activation::kRelu),
          mlp_spec(spec, d + q, 1, nn::Activation::kSigmoid),
          mlp_spec(spec, d + q, d, nn::Activation::kSigmoid),
          mlp_spec(spec, d + q, d, nn::Activation::kSigmoid)};
}

}  // namespace

HamNetworks HamNetworks::create(nn::ParameterStore& store, const std::string& prefix,
                                const HamSpec& spec, Rng& rng) {
  const NetSpecs s = net_specs(spec);
  nn::Mlp::create(store, prefix + "/embed", s.embed, rng);
  nn::Mlp::create(store, prefix + "/join", s.join, rng);
  nn::Mlp::create(store, prefix + "/search", s.search, rng);
  nn::Mlp::create(store, prefix + "/write_h", s.write_h, rng);
  const nn::Mlp gate = nn::Mlp::create(store, prefix + "/write_t", s.write_t, rng);
  gate.bias(gate.layer_count() - 1).value.setConstant(-1.0);
  return bind(store, prefix, spec);
}

HamNetworks HamNetworks::bind(nn::ParameterStore& store, const std::string& prefix,
                              const HamSpec& spec) {
  const NetSpecs s = net_specs(spec);
  HamNetworks nets;
  nets.spec_ = spec;
  nets.embed = nn::Mlp::bind(store, prefix + "/embed", s.embed);
  nets.join = nn::Mlp::bind(store, prefix + "/join", s.join);
  nets.search = nn::Mlp::bind(store, prefix + "/search", s.search);
  nets.write_h = nn::Mlp::bind(store, prefix + "/write_h", s.write_h);
  nets.write_t = nn::Mlp::bind(store, prefix + "/write_t", s.write_t);
  return nets;
}

nn::Var HamNetworks::write(nn::Var node, nn::Var query) const {
  const nn::Var input = nn::concat(node, query);
  const nn::Var gate = write_t(input);
  const nn::Var candidate = write_h(input);
  return gate * candidate + (1.0 - gate) * node;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(int n) {
  if (!is_power_of_two(n)) throw ConfigError("leaf count " + std::to_string(n) + " is not a power of two");
  int k = 0;
  while ((1 << k) < n) ++k;
  return k;
}

TreeMemory::TreeMemory(nn::Tape& tape, int leaf_count, Eigen::Index hidden_width)
    : tape_(&tape),
      leaf_count_(leaf_count),
      depth_(log2_exact(leaf_count)),
      hidden_width_(hidden_width),
      nodes_(static_cast<std::size_t>(2 * leaf_count)) {
  if (hidden_width <= 0) throw DimensionError("hidden width must be positive");
  const nn::Var zero = tape.constant(nn::Vector::Zero(hidden_width));
  for (int e = 1; e < 2 * leaf_count; ++e) nodes_[static_cast<std::size_t>(e)] = zero;
}

nn::Var TreeMemory::node(int heap_index) const {
  if (heap_index < 1 || heap_index >= 2 * leaf_count_) {
    throw UsageError("node index " + std::to_string(heap_index) + " out of range");
  }
  return nodes_[static_cast<std::size_t>(heap_index)];
}

void TreeMemory::set_node(int heap_index, nn::Var value) {
  if (heap_index < 1 || heap_index >= 2 * leaf_count_) {
    throw UsageError("node index " + std::to_string(heap_index) + " out of range");
  }
  if (value.size() != hidden_width_) throw DimensionError("node value width mismatch");
  nodes_[static_cast<std::size_t>(heap_index)] = value;
}

std::vector<nn::Vector> TreeMemory::snapshot() const {
  std::vector<nn::Vector> out(nodes_.size());
  for (std::size_t e = 1; e < nodes_.size(); ++e) out[e] = nodes_[e].value();
  return out;
}

nn::Var join_children(TreeMemory& mem, const HamNetworks& nets, int heap_index) {
  ++mem.counters().join;
  return nets.join(nn::concat(mem.node(2 * heap_index), mem.node(2 * heap_index + 1)));
}

TreeMemory init_memory(nn::Tape& tape, const HamNetworks& nets, std::span<const nn::Vector> inputs,
                       int leaf_count) {
  TreeMemory mem(tape, leaf_count, nets.spec().hidden_width);
  if (static_cast<int>(inputs.size()) > leaf_count) {
    throw CapacityError(std::to_string(inputs.size()) + " inputs do not fit in " +
                        std::to_string(leaf_count) + " leaves");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    ++mem.counters().embed;
    mem.set_node(leaf_count + static_cast<int>(i), nets.embed(tape.constant(inputs[i])));
  }
  for (int e = leaf_count - 1; e >= 1; --e) mem.set_node(e, join_children(mem, nets, e));
  return mem;
}

void refresh_path(TreeMemory& mem, const HamNetworks& nets, int leaf_heap_index) {
  for (int e = leaf_heap_index / 2; e >= 1; e /= 2) mem.set_node(e, join_children(mem, nets, e));
}

std::string AttentionTrace::decision_string() const {
  std::string s;
  s.reserve(decisions.size());
  for (bool right : decisions) s.push_back(right ? 'R' : 'L');
  return s;
}

AttentionTrace attend(TreeMemory& mem, const HamNetworks& nets, nn::Var query,
                      const AttentionMode& mode) {
  if (query.size() != nets.spec().query_width) {
    throw DimensionError("query width " + std::to_string(query.size()) + " does not match " +
                         std::to_string(nets.spec().query_width));
  }
  const auto* forced = std::get_if<ForcedMode>(&mode);
  if (forced != nullptr && static_cast<int>(forced->decisions.size()) != mem.depth()) {
    throw UsageError("forced attention needs " + std::to_string(mem.depth()) + " decisions, got " +
                     std::to_string(forced->decisions.size()));
  }
  AttentionTrace trace;
  int c = 1;
  for (int level = 0; level < mem.depth(); ++level) {
    ++mem.counters().search;
    const nn::Var p = nets.search(nn::concat(mem.node(c), query));
    const double prob = p.scalar();
    const nn::Var clamped = nn::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
    bool right = false;
    if (const auto* s = std::get_if<SampleMode>(&mode)) {
      right = bernoulli(*s->rng, prob);
    } else if (std::holds_alternative<GreedyMode>(mode)) {
      right = prob > 0.5;
    } else {
      right = forced->decisions[static_cast<std::size_t>(level)];
    }
    const double chosen = clamped.scalar();
    trace.log_prob += std::log(right ? chosen : 1.0 - chosen);
    trace.path.push_back(c);
    trace.decisions.push_back(right);
    trace.probabilities.push_back(prob);
    trace.branch_probs.push_back(clamped);
    c = 2 * c + (right ? 1 : 0);
  }
  trace.attended_leaf = c;
  return trace;
}

nn::Var decision_log_prob(const AttentionTrace& trace, std::size_t level) {
  const nn::Var p = trace.branch_probs.at(level);
  return trace.decisions.at(level) ? nn::log(p) : nn::log(1.0 - p);
}

nn::Var read_leaf(const TreeMemory& mem, const AttentionTrace& trace) {
  if (!mem.is_leaf(trace.attended_leaf)) throw UsageError("trace does not end at a leaf");
  return mem.node(trace.attended_leaf);
}

void write_update(TreeMemory& mem, const HamNetworks& nets, const AttentionTrace& trace,
                  nn::Var query) {
  const int a = trace.attended_leaf;
  if (!mem.is_leaf(a)) throw UsageError("trace does not end at a leaf");
  ++mem.counters().write;
  mem.set_node(a, nets.write(mem.node(a), query));
  refresh_path(mem, nets, a);
}

}  // namespace ham
