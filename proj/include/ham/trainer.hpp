#pragma once

#include "ham/config.hpp"
#include "ham/model.hpp"
#include "ham/nn/adam.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ham {

/// Number of bits whose correct value has probability strictly above 0.5.
double hamming_reward(const nn::Vector& bit_probs, const tasks::Bits& target);

/// R_t = sum_{i >= t} gamma^(i-t) r_i.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma);

/// Binary entropy in nats.
double binary_entropy(double p);
/// alpha / H(p).
double entropy_penalty(double p, double alpha);
/// alpha / H(p) on the tape; p should already be clamped away from 0 and 1.
nn::Var entropy_penalty(nn::Var p, double alpha);

/// Bits as a 0/1 vector.
nn::Vector to_vector(const tasks::Bits& bits);

struct LossOptions {
  RewardKind reward_kind = RewardKind::kHamming;
  bool normalize_reward = false;
  double gamma = 0.98;
  double alpha = 0.01;
  double baseline_weight = 0.1;
  bool learned_baseline = true;  // false: baseline fixed at 0, no regression term
};

LossOptions loss_options(const TrainConfig& config, double alpha);

/// Cost of one sampled episode together with what went into it.
struct Rollout {
  nn::Var cost;
  double supervised_log_prob = 0;  // sum_t log p(y_t | A)
  std::vector<double> rewards;     // per output step
  std::vector<double> returns;
  std::vector<double> baselines;
  int decisions = 0;
};

/// Builds the REINFORCE surrogate
///
///   - sum_t log p(y_t|A)
///   - sum_decisions sg(R_t - bl_t) log p(decision)
///   + baseline_weight sum_t (sg(R_t) - bl_t)^2
///   + sum_decisions alpha / H(p)
///
/// where every decision inside the window closed by output step t gets R_t.
/// Unscored outputs (PUSH steps) contribute neither loss nor reward.
Rollout reinforce_loss(const Model& model, nn::Tape& tape, const EpisodeOutput& episode,
                       const tasks::Example& example, const LossOptions& options);

/// Exact soft-attention cost: - sum_t log p(y_t | x).
Rollout dham_loss(const Model& model, nn::Tape& tape, const EpisodeOutput& episode,
                  const tasks::Example& example);

struct StepMetrics {
  double cost = 0;         // batch mean
  double mean_reward = 0;  // per scored output step
  double grad_norm = 0;    // before clipping
};

/// One REINFORCE update: a single sampled descent per example, costs averaged
/// over the batch, global-norm clipping, Adam. `batch_seed` drives all
/// sampling. With threads > 1 the batch is split into contiguous chunks whose
/// gradients are summed in chunk order.
StepMetrics train_step(Model& model, nn::AdamState& adam, std::span<const tasks::Example> batch,
                       const TrainConfig& config, double lr, double alpha,
                       std::uint64_t batch_seed, int threads = 1);

/// One exact-gradient update of a soft-attention model.
StepMetrics train_dham_step(Model& model, nn::AdamState& adam,
                            std::span<const tasks::Example> batch, const TrainConfig& config,
                            double lr, int threads = 1);

struct CurriculumState {
  int k = 1;  // current capacity is 2^k
  std::vector<double> history;
  int capacity() const { return 1 << k; }
};

/// Records the error and doubles the capacity when it is below the threshold,
/// never beyond max_capacity.
CurriculumState curriculum_advance(CurriculumState state, double validation_error,
                                   double threshold, int max_capacity);

struct EpochMetrics {
  int epoch = 0;
  int capacity = 0;
  double train_cost = 0;
  double mean_reward = 0;
  double validation_error = 0;
  double learning_rate = 0;
  double alpha = 0;
};

std::string metrics_header(Attention attention);
std::string metrics_row(const EpochMetrics& m, Attention attention);

/// Everything that evolves during a run.
struct TrainerState {
  Model model;
  nn::AdamState adam;
  CurriculumState curriculum;
  int next_epoch = 0;
  double best_error = 2.0;
  int best_capacity = 0;
};

TrainerState initial_trainer_state(const RunConfig& config);

/// Fraction of validation examples with a wrong output, at the current
/// capacity with lengths uniform in [1, capacity].
double validation_error(const Model& model, const RunConfig& config, std::uint64_t seed);

/// Called after every epoch; `improved` means this epoch is the new best
/// (a larger capacity, or the same capacity with lower validation error).
using EpochCallback =
    std::function<void(const EpochMetrics& metrics, const TrainerState& state, bool improved)>;

/// Runs the remaining epochs of a curriculum run.
void train(const RunConfig& config, TrainerState& state, const EpochCallback& on_epoch);

}  // namespace ham
