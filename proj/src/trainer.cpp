#include "ham/trainer.hpp"

#include "ham/eval.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

namespace ham {

double hamming_reward(const nn::Vector& bit_probs, const tasks::Bits& target) {
  if (static_cast<std::size_t>(bit_probs.size()) != target.size()) {
    throw DimensionError("hamming_reward: width mismatch");
  }
  double correct = 0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    const double p = bit_probs(static_cast<Eigen::Index>(j));
    correct += (target[j] ? p : 1.0 - p) > 0.5 ? 1.0 : 0.0;
  }
  return correct;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> returns(rewards.size());
  double acc = 0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + gamma * acc;
    returns[t] = acc;
  }
  return returns;
}

double binary_entropy(double p) { return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p); }

double entropy_penalty(double p, double alpha) {
  if (alpha == 0) return 0;
  return alpha / binary_entropy(p);
}

nn::Var entropy_penalty(nn::Var p, double alpha) {
  const nn::Var q = 1.0 - p;
  const nn::Var h = -(p * nn::log(p) + q * nn::log(q));
  return alpha * nn::reciprocal(h);
}

nn::Vector to_vector(const tasks::Bits& bits) {
  nn::Vector v(static_cast<Eigen::Index>(bits.size()));
  for (std::size_t j = 0; j < bits.size(); ++j) v(static_cast<Eigen::Index>(j)) = bits[j];
  return v;
}

LossOptions loss_options(const TrainConfig& config, double alpha) {
  LossOptions o;
  o.reward_kind = config.reward_kind;
  o.normalize_reward = config.normalize_reward;
  o.gamma = config.gamma;
  o.alpha = alpha;
  o.baseline_weight = config.baseline_weight;
  return o;
}

namespace {

bool is_scored(const tasks::Example& example, std::size_t t) {
  return example.scored.empty() || example.scored[t];
}

void check_lengths(const EpisodeOutput& episode, const tasks::Example& example) {
  if (episode.logits.size() != example.targets.size()) {
    throw UsageError("episode emitted " + std::to_string(episode.logits.size()) +
                     " symbols for " + std::to_string(example.targets.size()) + " targets");
  }
}

}  // namespace

Rollout reinforce_loss(const Model& model, nn::Tape& tape, const EpisodeOutput& episode,
                       const tasks::Example& example, const LossOptions& options) {
  check_lengths(episode, example);
  Rollout r;
  const std::size_t steps = example.targets.size();
  nn::Var cost = tape.constant(0.0);

  r.rewards.assign(steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    if (!is_scored(example, t)) continue;
    const nn::Var ll = nn::bernoulli_log_likelihood(episode.logits[t], to_vector(example.targets[t]));
    cost = cost - ll;
    r.supervised_log_prob += ll.scalar();
    if (options.reward_kind == RewardKind::kLogProb) {
      r.rewards[t] = ll.scalar();
    } else {
      r.rewards[t] = hamming_reward(episode.bit_probs[t], example.targets[t]);
      if (options.normalize_reward) r.rewards[t] /= static_cast<double>(example.targets[t].size());
    }
  }
  r.returns = discounted_returns(r.rewards, options.gamma);

  r.baselines.assign(steps, 0.0);
  if (options.learned_baseline) {
    for (std::size_t t = 0; t < steps; ++t) {
      const nn::Var bl = model.baseline(episode.baseline_features[t]);
      r.baselines[t] = bl.scalar();
      if (options.baseline_weight != 0) {
        cost = cost + options.baseline_weight * nn::square(bl + (-r.returns[t]));
      }
    }
  }

  for (std::size_t s = 0; s < episode.traces.size(); ++s) {
    const AttentionTrace& trace = episode.traces[s];
    const auto w = static_cast<std::size_t>(episode.step_window[s]);
    const double advantage = r.returns[w] - r.baselines[w];
    for (std::size_t level = 0; level < trace.decisions.size(); ++level) {
      if (advantage != 0) cost = cost - advantage * decision_log_prob(trace, level);
      if (options.alpha != 0) cost = cost + entropy_penalty(trace.branch_probs[level], options.alpha);
      ++r.decisions;
    }
  }
  r.cost = cost;
  return r;
}

Rollout dham_loss(const Model& model, nn::Tape& tape, const EpisodeOutput& episode,
                  const tasks::Example& example) {
  (void)model;
  check_lengths(episode, example);
  Rollout r;
  nn::Var cost = tape.constant(0.0);
  r.rewards.assign(example.targets.size(), 0.0);
  for (std::size_t t = 0; t < example.targets.size(); ++t) {
    if (!is_scored(example, t)) continue;
    const nn::Var ll = nn::bernoulli_log_likelihood(episode.logits[t], to_vector(example.targets[t]));
    cost = cost - ll;
    r.supervised_log_prob += ll.scalar();
    r.rewards[t] = ll.scalar();
  }
  r.returns = r.rewards;
  r.baselines.assign(r.rewards.size(), 0.0);
  r.cost = cost;
  return r;
}

namespace {

struct ChunkTotals {
  double cost = 0;
  double reward = 0;
  std::int64_t scored = 0;
};

/// Runs examples [lo, hi) of the batch on `model`, accumulating gradients
/// of (cost / batch size) into its parameters.
template <class Fn>
ChunkTotals run_chunk(std::span<const tasks::Example> batch, std::size_t lo, std::size_t hi,
                      Fn&& rollout) {
  thread_local nn::Tape tape;
  ChunkTotals totals;
  const nn::Vector seed = nn::Vector::Constant(1, 1.0 / static_cast<double>(batch.size()));
  for (std::size_t i = lo; i < hi; ++i) {
    tape.clear();
    const tasks::Example& ex = batch[i];
    Rollout r;
    try {
      r = rollout(tape, ex, i);
      if (!std::isfinite(r.cost.scalar())) throw NumericalError("non-finite cost");
      tape.backward(r.cost, seed);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (batch example " + std::to_string(i) +
                           ", task " + tasks::to_string(ex.task) + ", length " +
                           std::to_string(ex.length) + ")");
    }
    totals.cost += r.cost.scalar();
    for (std::size_t t = 0; t < r.rewards.size(); ++t) {
      if (!is_scored(ex, t)) continue;
      totals.reward += r.rewards[t];
      ++totals.scored;
    }
  }
  tape.clear();
  return totals;
}

template <class Fn>
StepMetrics run_batch(Model& model, nn::AdamState& adam, std::span<const tasks::Example> batch,
                      const TrainConfig& config, double lr, int threads, Fn&& rollout) {
  if (batch.empty()) throw UsageError("empty batch");
  model.params().zero_grad();
  ChunkTotals totals;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), batch.size());
  if (workers == 1) {
    totals = run_chunk(batch, 0, batch.size(),
                       [&](nn::Tape& tape, const tasks::Example& ex, std::size_t i) {
                         return rollout(model, tape, ex, i);
                       });
  } else {
    std::vector<Model> clones(workers, model);
    std::vector<ChunkTotals> parts(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = batch.size() * w / workers;
      const std::size_t hi = batch.size() * (w + 1) / workers;
      pool.emplace_back([&, w, lo, hi] {
        try {
          clones[w].params().zero_grad();
          parts[w] = run_chunk(batch, lo, hi,
                               [&](nn::Tape& tape, const tasks::Example& ex, std::size_t i) {
                                 return rollout(clones[w], tape, ex, i);
                               });
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (std::size_t w = 0; w < workers; ++w) {
      totals.cost += parts[w].cost;
      totals.reward += parts[w].reward;
      totals.scored += parts[w].scored;
      for (auto& [name, p] : model.params()) p.grad += clones[w].params().at(name).grad;
    }
  }

  StepMetrics m;
  m.cost = totals.cost / static_cast<double>(batch.size());
  m.mean_reward = totals.scored == 0 ? 0.0 : totals.reward / static_cast<double>(totals.scored);
  m.grad_norm = nn::clip_global_norm(model.params(), config.clip_norm);
  if (!std::isfinite(m.grad_norm)) throw NumericalError("non-finite gradient norm");
  nn::adam_step(model.params(), adam, lr);
  return m;
}

}  // namespace

StepMetrics train_step(Model& model, nn::AdamState& adam, std::span<const tasks::Example> batch,
                       const TrainConfig& config, double lr, double alpha,
                       std::uint64_t batch_seed, int threads) {
  if (model.config().attention != Attention::kHard) {
    throw UsageError("train_step needs hard attention; use train_dham_step");
  }
  const LossOptions options = loss_options(config, alpha);
  return run_batch(model, adam, batch, config, lr, threads,
                   [&](const Model& m, nn::Tape& tape, const tasks::Example& ex, std::size_t i) {
                     Rng rng(mix_seed(batch_seed, i));
                     const auto inputs = encode_inputs(m.config(), ex);
                     EpisodeOptions eo;
                     eo.max_outputs = static_cast<int>(ex.targets.size());
                     const EpisodeOutput ep = run_episode(m, tape, inputs, SampleMode{&rng}, eo);
                     return reinforce_loss(m, tape, ep, ex, options);
                   });
}

StepMetrics train_dham_step(Model& model, nn::AdamState& adam,
                            std::span<const tasks::Example> batch, const TrainConfig& config,
                            double lr, int threads) {
  if (model.config().attention != Attention::kSoft) {
    throw UsageError("train_dham_step needs soft attention");
  }
  return run_batch(model, adam, batch, config, lr, threads,
                   [&](const Model& m, nn::Tape& tape, const tasks::Example& ex, std::size_t) {
                     const auto inputs = encode_inputs(m.config(), ex);
                     EpisodeOptions eo;
                     eo.max_outputs = static_cast<int>(ex.targets.size());
                     const EpisodeOutput ep = run_episode(m, tape, inputs, GreedyMode{}, eo);
                     return dham_loss(m, tape, ep, ex);
                   });
}

CurriculumState curriculum_advance(CurriculumState state, double validation_error,
                                   double threshold, int max_capacity) {
  state.history.push_back(validation_error);
  if (validation_error < threshold && state.capacity() * 2 <= max_capacity) ++state.k;
  return state;
}

std::string metrics_header(Attention attention) {
  if (attention == Attention::kSoft) return "epoch,capacity,train_cost,validation_error,learning_rate";
  return "epoch,capacity,train_cost,mean_reward,validation_error,learning_rate,alpha";
}

std::string metrics_row(const EpochMetrics& m, Attention attention) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << m.epoch << ',' << m.capacity << ',' << m.train_cost << ',';
  if (attention == Attention::kHard) out << m.mean_reward << ',';
  out << m.validation_error << ',' << m.learning_rate;
  if (attention == Attention::kHard) out << ',' << m.alpha;
  return out.str();
}

namespace {

int data_bits_for(const RunConfig& config) {
  return config.task == tasks::TaskId::kReverse ? config.data_bits : tasks::kReverseDefaultBits;
}

/// Controller tasks use lengths uniform in [1, capacity]; data-structure
/// sequences always have exactly `capacity` operations.
tasks::Example training_example(const RunConfig& config, int capacity, Rng& rng) {
  if (tasks::is_data_structure(config.task)) return tasks::gen_ds(config.task, capacity, rng);
  return tasks::sample_example(config.task, 1, capacity, rng, data_bits_for(config));
}

}  // namespace

TrainerState initial_trainer_state(const RunConfig& config) {
  config.validate();
  TrainerState s{Model(config.model, mix_seed(config.seed, 0x1417)), {}, {}, 0, 2.0, 0};
  s.curriculum.k = log2_exact(config.train.curriculum_start);
  s.model.set_capacity(s.curriculum.capacity());
  return s;
}

double validation_error(const Model& model, const RunConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const int count = config.train.validation_batches * config.train.batch_size;
  const int capacity = model.config().n;
  const Predictor predictor = model_predictor(model);
  int wrong = 0;
  for (int i = 0; i < count; ++i) {
    const tasks::Example ex = training_example(config, capacity, rng);
    wrong += score_example(ex, predictor(ex).symbols).correct ? 0 : 1;
  }
  return static_cast<double>(wrong) / count;
}

void train(const RunConfig& config, TrainerState& state, const EpochCallback& on_epoch) {
  config.validate();
  const TrainConfig& tc = config.train;
  std::vector<tasks::Example> batch;
  while (state.next_epoch < tc.epochs) {
    const int epoch = state.next_epoch;
    const int capacity = state.curriculum.capacity();
    state.model.set_capacity(capacity);
    const double lr = tc.lr0 * std::pow(tc.lr_decay, epoch);
    const double alpha = tc.alpha0 * std::pow(tc.alpha_decay, epoch);

    EpochMetrics m;
    m.epoch = epoch;
    m.capacity = capacity;
    m.learning_rate = lr;
    m.alpha = config.model.attention == Attention::kHard ? alpha : 0.0;
    for (int b = 0; b < tc.batches_per_epoch; ++b) {
      const std::uint64_t batch_seed = mix_seed(mix_seed(config.seed, epoch + 1), b);
      Rng rng(batch_seed);
      batch.clear();
      for (int i = 0; i < tc.batch_size; ++i) batch.push_back(training_example(config, capacity, rng));
      const StepMetrics s =
          config.model.attention == Attention::kHard
              ? train_step(state.model, state.adam, batch, tc, lr, alpha, mix_seed(batch_seed, 7),
                           config.threads)
              : train_dham_step(state.model, state.adam, batch, tc, lr, config.threads);
      m.train_cost += s.cost / tc.batches_per_epoch;
      m.mean_reward += s.mean_reward / tc.batches_per_epoch;
    }
    m.validation_error =
        validation_error(state.model, config, mix_seed(mix_seed(config.seed, epoch + 1), 0x7a1));

    const bool improved = capacity > state.best_capacity ||
                          (capacity == state.best_capacity && m.validation_error < state.best_error);
    if (improved) {
      state.best_capacity = capacity;
      state.best_error = m.validation_error;
    }
    state.curriculum =
        curriculum_advance(state.curriculum, m.validation_error, tc.curriculum_threshold, config.model.n);
    state.next_epoch = epoch + 1;
    if (on_epoch) on_epoch(m, state, improved);
  }
  state.model.set_capacity(state.curriculum.capacity());
}

}  // namespace ham
