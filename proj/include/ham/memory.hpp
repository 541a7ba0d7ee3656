#pragma once

#include "ham/nn/mlp.hpp"
#include "ham/nn/tape.hpp"
#include "ham/random.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ham {

/// Widths of the four tree transformations.
struct HamSpec {
  Eigen::Index input_width = 0;   // b_in, width of an input symbol
  Eigen::Index hidden_width = 0;  // d, width of every node value
  Eigen::Index query_width = 0;   // q, width of the SEARCH/WRITE query
  Eigen::Index mlp_hidden = 20;
  int mlp_depth = 1;
};

/// EMBED, JOIN, SEARCH and the two highway halves of WRITE.
///
///   EMBED  : b_in -> d (ReLU output)
///   JOIN   : [left, right] -> d (ReLU output)
///   SEARCH : [node, query] -> (0,1)
///   WRITE  : T([node, query]) * H([node, query]) + (1 - T) * node
///
/// The write gate T starts with output bias -1 so fresh models mostly keep
/// the old leaf value.
class HamNetworks {
 public:
  HamNetworks() = default;

  static HamNetworks create(nn::ParameterStore& store, const std::string& prefix,
                            const HamSpec& spec, Rng& rng);
  static HamNetworks bind(nn::ParameterStore& store, const std::string& prefix,
                          const HamSpec& spec);

  const HamSpec& spec() const { return spec_; }

  nn::Mlp embed;
  nn::Mlp join;
  nn::Mlp search;
  nn::Mlp write_h;
  nn::Mlp write_t;

  nn::Var write(nn::Var node, nn::Var query) const;

 private:
  HamSpec spec_;
};

/// Instrumented evaluation counts, per memory instance.
struct AccessCounters {
  std::int64_t embed = 0;
  std::int64_t join = 0;
  std::int64_t search = 0;
  std::int64_t write = 0;
};

/// Full binary tree of node values in heap layout: root at 1, children of e at
/// 2e and 2e+1, leaves at n..2n-1 (leaf i holds input slot i). Every value is
/// a Var on the tape the memory was built on, so gradients flow through it.
class TreeMemory {
 public:
  /// All-zero tree.
  TreeMemory(nn::Tape& tape, int leaf_count, Eigen::Index hidden_width);

  int leaf_count() const { return leaf_count_; }
  int depth() const { return depth_; }
  Eigen::Index hidden_width() const { return hidden_width_; }
  int node_count() const { return 2 * leaf_count_ - 1; }

  nn::Var node(int heap_index) const;
  void set_node(int heap_index, nn::Var value);
  nn::Var leaf(int ordinal) const { return node(leaf_count_ + ordinal); }

  bool is_leaf(int heap_index) const { return heap_index >= leaf_count_; }

  nn::Tape& tape() const { return *tape_; }
  AccessCounters& counters() { return counters_; }
  const AccessCounters& counters() const { return counters_; }

  /// Current value of every node, heap-indexed (entry 0 unused).
  std::vector<nn::Vector> snapshot() const;

 private:
  nn::Tape* tape_;
  int leaf_count_;
  int depth_;
  Eigen::Index hidden_width_;
  std::vector<nn::Var> nodes_;
  AccessCounters counters_;
};

bool is_power_of_two(int n);
int log2_exact(int n);

/// Leaves take EMBED(x_i), unused leaves stay zero, inner nodes are JOINed
/// bottom-up (exactly n-1 JOIN evaluations).
TreeMemory init_memory(nn::Tape& tape, const HamNetworks& nets, std::span<const nn::Vector> inputs,
                       int leaf_count);

/// JOIN(h_left, h_right) for one inner node, counted.
nn::Var join_children(TreeMemory& mem, const HamNetworks& nets, int heap_index);

/// Re-JOINs every ancestor of `leaf_heap_index`, bottom-up.
void refresh_path(TreeMemory& mem, const HamNetworks& nets, int leaf_heap_index);

struct SampleMode {
  Rng* rng;
};
struct GreedyMode {};
struct ForcedMode {
  std::vector<bool> decisions;  // true = right
};
using AttentionMode = std::variant<SampleMode, GreedyMode, ForcedMode>;

/// Probability clamp applied before any logarithm of a branch probability.
inline constexpr double kProbabilityFloor = 1e-6;

struct AttentionTrace {
  std::vector<int> path;              // inner nodes visited, root first
  std::vector<bool> decisions;        // true = went right
  std::vector<double> probabilities;  // raw SEARCH outputs p (probability of right)
  std::vector<nn::Var> branch_probs;  // clamped p as tape values
  int attended_leaf = 1;              // heap index
  double log_prob = 0;                // sum of log(chosen-branch clamped probability)

  /// Zero-based position of the attended leaf among the leaves.
  int leaf_ordinal(int leaf_count) const { return attended_leaf - leaf_count; }
  std::string decision_string() const;
};

/// Top-down descent from the root, one SEARCH per level.
AttentionTrace attend(TreeMemory& mem, const HamNetworks& nets, nn::Var query,
                      const AttentionMode& mode);

/// Log-probability of the decision taken at `level`, on the tape.
nn::Var decision_log_prob(const AttentionTrace& trace, std::size_t level);

nn::Var read_leaf(const TreeMemory& mem, const AttentionTrace& trace);

/// Highway WRITE on the attended leaf, then refresh of its root path.
void write_update(TreeMemory& mem, const HamNetworks& nets, const AttentionTrace& trace,
                  nn::Var query);

}  // namespace ham
