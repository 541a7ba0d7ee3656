#pragma once

#include "ham/config.hpp"
#include "ham/trainer.hpp"

#include <filesystem>

namespace ham {

/// On-disk layout (all integers little-endian):
///
///   "HAMCKPT1\n"
///   u64 length, JSON header (config, curriculum, epoch counters, Adam step)
///   u64 tensor count, then per tensor:
///     u64 name length, name, i64 rows, i64 cols, rows*cols float64 (column-major)
///
/// Tensors are the model parameters followed by the Adam moments under
/// "adam/m/<name>" and "adam/v/<name>".
struct Checkpoint {
  RunConfig config;
  nn::ParameterStore params;
  nn::AdamState adam;
  CurriculumState curriculum;
  int next_epoch = 0;
  double best_error = 2.0;
  int best_capacity = 0;
};

/// Writes to a temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const RunConfig& config,
                     const TrainerState& state);

/// Throws ConfigError on a malformed file or a parameter set that does not
/// match the stored configuration exactly.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Model at the checkpoint's current curriculum capacity plus optimizer state.
TrainerState restore_trainer_state(const Checkpoint& checkpoint);

}  // namespace ham
