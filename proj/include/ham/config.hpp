#pragma once

#include "ham/tasks.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace ham {

enum class Attention { kHard, kSoft };
enum class ModelMode { kController, kRaw };
/// Second argument of WRITE in the soft model.
enum class WriteQuery { kController, kRoot };
enum class RewardKind { kLogProb, kHamming };

std::string to_string(Attention a);
std::string to_string(ModelMode m);
std::string to_string(WriteQuery q);
std::string to_string(RewardKind r);
Attention parse_attention(const std::string& s);
ModelMode parse_mode(const std::string& s);
WriteQuery parse_write_query(const std::string& s);
RewardKind parse_reward(const std::string& s);

struct ModelConfig {
  int b = tasks::kReverseDefaultBits;     // output data bits
  int b_in = tasks::kReverseDefaultBits;  // input symbol width
  int d = 20;                             // node value width
  int l = 20;                             // controller width
  int eta = 1;                            // memory accesses per output symbol
  int n = 32;                             // leaf capacity
  int mlp_hidden = 20;
  int mlp_depth = 1;
  Attention attention = Attention::kHard;
  ModelMode mode = ModelMode::kController;
  WriteQuery dham_write_query = WriteQuery::kController;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  /// Width of the SEARCH/WRITE query: l with a controller, b_in in raw mode.
  int query_width() const { return mode == ModelMode::kController ? l : b_in; }
};

struct TrainConfig {
  double gamma = 0.98;
  double alpha0 = 0.01;
  double alpha_decay = 0.95;
  double lr0 = 1e-3;
  double lr_decay = 0.97;
  int batch_size = 50;
  int batches_per_epoch = 1000;
  int epochs = 100;
  double clip_norm = 5.0;
  double curriculum_threshold = 0.05;
  int curriculum_start = 2;  // initial capacity, doubled up to ModelConfig::n
  RewardKind reward_kind = RewardKind::kHamming;
  bool normalize_reward = false;  // divide the per-symbol reward by b+1
  double baseline_weight = 0.1;
  int validation_batches = 200;

  void validate() const;
};

/// Everything needed to reproduce a run.
struct RunConfig {
  tasks::TaskId task = tasks::TaskId::kReverse;
  int data_bits = tasks::kReverseDefaultBits;
  ModelConfig model;
  TrainConfig train;
  std::uint64_t seed = 1;
  int threads = 1;
  int checkpoint_every = 1;  // epochs

  void validate() const;
};

/// Model widths that fit a task: b and b_in from the task, raw mode for the
/// data-structure tasks, eta=2 for Search.
ModelConfig model_config_for(tasks::TaskId task, int data_bits, ModelConfig base = {});

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// "key = value" lines, one per field, in a fixed order.
std::string to_key_values(const RunConfig& c);

/// Sets one field by its key-value name (as written by to_key_values).
void apply_setting(RunConfig& c, const std::string& key, const std::string& value);

/// Applies every "key = value" line; blank lines and '#' comments are skipped.
void apply_key_values(RunConfig& c, const std::string& text);

}  // namespace ham
