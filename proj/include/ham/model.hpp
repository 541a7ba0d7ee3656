#pragma once

#include "ham/config.hpp"
#include "ham/dham.hpp"
#include "ham/memory.hpp"
#include "ham/nn/lstm.hpp"
#include "ham/nn/mlp.hpp"
#include "ham/tasks.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ham {

/// LSTM+HAM (controller mode) or raw HAM, with hard or soft attention.
///
/// Parameter layout:
///   ham/{embed,join,search,write_h,write_t}/...   tree transformations
///   controller/lstm/{weight,bias}                  controller mode only
///   controller/output/{weight,bias}                h_LSTM -> b+1 logits
///   raw/output/layer*/...                          raw mode only, h_a -> b logits
///   baseline/{weight,bias}                         REINFORCE baseline
///
/// No parameter depends on the leaf count, so one store serves every capacity.
class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t seed);
  /// Adopts existing parameters; names and shapes must match the layout exactly.
  Model(const ModelConfig& config, const nn::ParameterStore& params);

  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&& other) noexcept;
  Model& operator=(Model&& other) noexcept;

  const ModelConfig& config() const { return config_; }
  nn::ParameterStore& params() const { return params_; }

  /// Same parameters on a tree with `leaf_count` leaves.
  Model with_capacity(int leaf_count) const;
  /// Resizes the tree in place; parameters are untouched.
  void set_capacity(int leaf_count);

  const HamNetworks& ham() const { return ham_; }
  const nn::Lstm& lstm() const;

  /// Output logits: affine map of h_LSTM (controller) or MLP of h_a (raw).
  nn::Var output_logits(nn::Var features) const;
  nn::Var baseline(nn::Var features) const;

  /// Width of the symbols emitted per output step (b+1 with a controller).
  int output_width() const;
  /// Width of the baseline input.
  int baseline_width() const;

 private:
  void build(std::uint64_t seed);
  void bind();

  ModelConfig config_;
  // Gradients are accumulators; forward passes never change values.
  mutable nn::ParameterStore params_;
  HamNetworks ham_;
  nn::Lstm lstm_;
  nn::Parameter* output_weight_ = nullptr;
  nn::Parameter* output_bias_ = nullptr;
  nn::Mlp raw_output_;
  nn::Parameter* baseline_weight_ = nullptr;
  nn::Parameter* baseline_bias_ = nullptr;
};

/// Checks widths against the model and returns the encoded input symbols.
std::vector<nn::Vector> encode_inputs(const ModelConfig& config, const tasks::Example& example);

struct ModelState {
  nn::LstmState lstm;  // unused in raw mode
  TreeMemory memory;
  int step_index = 0;
};

/// Controller mode: HAM initialized from the whole input, zero LSTM state.
ModelState initial_state(const Model& model, nn::Tape& tape, std::span<const nn::Vector> inputs);
/// Raw mode: all-zero tree.
ModelState initial_raw_state(const Model& model, nn::Tape& tape);

/// Everything recorded during an episode; tape handles stay valid until the
/// tape is cleared.
struct EpisodeOutput {
  std::vector<nn::Vector> bit_probs;       // per output step
  std::vector<nn::Var> logits;             // per output step
  std::vector<nn::Var> baseline_features;  // per output step, gradient-stopped
  std::vector<AttentionTrace> traces;      // hard attention, per attention step
  std::vector<LeafDistribution> distributions;  // soft attention, per attention step
  std::vector<int> step_window;            // attention step -> output step it precedes
  std::vector<std::vector<nn::Vector>> node_dumps;  // optional, per attention step
  int attention_steps = 0;
  AccessCounters counters;
};

/// One controller timestep: attention, LSTM update, output when
/// (step_index+1) is a multiple of eta, then the memory update.
/// Returns the output logits when a symbol was emitted.
std::optional<nn::Var> step(const Model& model, ModelState& state, const AttentionMode& mode,
                            EpisodeOutput& log);

/// One raw-HAM timestep for operation symbol x_t; always emits.
nn::Var raw_step(const Model& model, ModelState& state, const nn::Vector& op,
                 const AttentionMode& mode, EpisodeOutput& log);

struct EpisodeOptions {
  int max_outputs = 1;        // controller mode: symbols to emit at most
  bool stop_at_end = false;   // stop once the end bit exceeds 0.5
  bool dump_nodes = false;
};

/// Runs a whole episode on `tape`. Controller mode initializes the tree from
/// `inputs`; raw mode treats `inputs` as the operation stream.
EpisodeOutput run_episode(const Model& model, nn::Tape& tape, std::span<const nn::Vector> inputs,
                          const AttentionMode& mode, const EpisodeOptions& options);

/// Rounds probabilities at 0.5 (exactly 0.5 gives 0).
tasks::Bits round_bits(const nn::Vector& probs);

/// Deterministic inference: greedy descent, rounded bits, truncated at the
/// first predicted end symbol (which is not returned), at most n+1 symbols.
/// Raw mode returns one b-bit symbol per operation.
std::vector<tasks::Bits> predict(const Model& model, std::span<const nn::Vector> inputs);

/// predict() plus the counters and traces of the run.
struct Prediction {
  std::vector<tasks::Bits> symbols;
  EpisodeOutput episode;
};
Prediction predict_with_trace(const Model& model, nn::Tape& tape,
                              std::span<const nn::Vector> inputs, bool dump_nodes = false);

}  // namespace ham
