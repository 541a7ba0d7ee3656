// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Pass criterion numbers as arguments to run a subset.

#include "ham/dham.hpp"
#include "ham/eval.hpp"
#include "ham/trainer.hpp"

#include "support.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

using namespace ham;
using tasks::Bits;
using tasks::TaskId;
namespace fs = std::filesystem;

namespace {

// ---- tolerances ----
constexpr double kGradientTolerance = 1e-5;
constexpr double kUnbiasedTolerance = 1e-8;
constexpr double kNormalizationTolerance = 1e-9;
constexpr int kOracleExamples = 10000;
constexpr double kReverseTestError = 0.05;
constexpr double kReverseBudgetSeconds = 30 * 60;
constexpr double kGeneralizationError = 0.25;
constexpr double kDhamTestError = 0.02;
constexpr double kDhamBudgetSeconds = 15 * 60;
constexpr double kStackError = 0.05;
constexpr double kStackBudgetSeconds = 30 * 60;
constexpr double kNoisyTarget = 0.96;
constexpr double kNoisyTolerance = 0.02;
constexpr int kNoisyTrials = 10000;
constexpr int kTestTrials = 2500;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string fmt(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::map<std::string, nn::Matrix> grads_of(const nn::ParameterStore& store) {
  std::map<std::string, nn::Matrix> out;
  for (const auto& [name, p] : store) out[name] = p.grad;
  return out;
}

std::map<std::string, nn::Matrix> values_of(const nn::ParameterStore& store) {
  std::map<std::string, nn::Matrix> out;
  for (const auto& [name, p] : store) out[name] = p.value;
  return out;
}

// ---- 1 ----

struct ElementwiseCheck {
  double worst = 0;
  std::string worst_name;
  std::size_t checked = 0;
  std::size_t kinks = 0;
};

/// Central differences per scalar against one backward pass. A scalar whose
/// difference quotient moves between h and h/2 straddles a ReLU kink; it is
/// counted apart instead of scored.
ElementwiseCheck elementwise_fd(nn::ParameterStore& store, const test::LossFn& loss, ElementwiseCheck r) {
  constexpr double h = 1e-5, floor = 1e-4;
  nn::Tape tape;
  store.zero_grad();
  tape.backward(loss(tape));
  auto quotient = [&](double& x, double step) {
    const double saved = x;
    x = saved + step;
    tape.clear();
    const double up = loss(tape).scalar();
    x = saved - step;
    tape.clear();
    const double down = loss(tape).scalar();
    x = saved;
    return (up - down) / (2 * step);
  };
  for (auto& [name, p] : store) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      const double a = p.grad.data()[i];
      const double n = quotient(x, h);
      const double half = quotient(x, h / 2);
      ++r.checked;
      if (std::abs(n - half) / std::max({std::abs(n), std::abs(half), floor}) > 1e-3) {
        ++r.kinks;
        continue;
      }
      const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
      if (rel > r.worst) {
        r.worst = rel;
        r.worst_name = name;
      }
    }
  }
  tape.clear();
  return r;
}

Outcome dham_gradient() {
  const double start = cpu_seconds();
  ModelConfig c;
  c.n = 4;
  c.d = 3;
  c.l = 4;
  c.b = 2;
  c.b_in = 2;
  c.attention = Attention::kSoft;
  ElementwiseCheck r;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Model model(c, seed);
    Rng rng(100 + seed);
    test::jitter(model.params(), rng, 0.2);
    const tasks::Example ex = tasks::gen_reverse(1, rng, 2);  // one symbol then the end symbol
    const test::LossFn loss = [&](nn::Tape& tape) {
      EpisodeOptions eo;
      eo.max_outputs = 2;
      const EpisodeOutput ep = run_episode(model, tape, ex.inputs, GreedyMode{}, eo);
      return dham_loss(model, tape, ep, ex).cost;
    };
    r = elementwise_fd(model.params(), loss, r);
  }
  const double secs = cpu_seconds() - start;
  return {r.worst <= kGradientTolerance && r.kinks * 100 < r.checked && secs < 60,
          "max relative error " + fmt(r.worst) + " (" + r.worst_name + ") over " + std::to_string(r.checked) +
              " scalars, " + std::to_string(r.kinks) + " at ReLU kinks, tolerance " + fmt(kGradientTolerance) +
              ", " + fmt(secs) + " s"};
}

// ---- 2 ----

EpisodeOutput forced_episode(const Model& model, nn::Tape& tape, const std::vector<nn::Vector>& xs,
                             const std::vector<std::vector<bool>>& paths) {
  EpisodeOutput out;
  ModelState state = initial_state(model, tape, xs);
  for (const auto& path : paths) step(model, state, ForcedMode{path}, out);
  return out;
}

/// Largest |sum_A p(A) grad surrogate(A) - grad F| over non-baseline scalars.
double unbiasedness_gap(Model& model, const tasks::Example& ex, const LossOptions& opt) {
  const int depth = log2_exact(model.config().n);
  const int steps = static_cast<int>(ex.targets.size());
  const int bits = depth * steps;
  std::map<std::string, nn::Matrix> expected;
  for (auto& [name, p] : model.params()) expected[name] = nn::Matrix::Zero(p.value.rows(), p.value.cols());

  nn::Tape exact_tape;
  nn::Var objective = exact_tape.constant(0.0);
  for (int mask = 0; mask < (1 << bits); ++mask) {
    std::vector<std::vector<bool>> paths(static_cast<std::size_t>(steps));
    for (int k = 0; k < bits; ++k) paths[static_cast<std::size_t>(k / depth)].push_back((mask >> k) & 1);

    nn::Tape tape;
    const EpisodeOutput ep = forced_episode(model, tape, ex.inputs, paths);
    double prob = 1;
    for (const auto& t : ep.traces) prob *= std::exp(t.log_prob);
    model.params().zero_grad();
    tape.backward(reinforce_loss(model, tape, ep, ex, opt).cost);
    for (auto& [name, p] : model.params()) expected[name] += prob * p.grad;

    const EpisodeOutput same = forced_episode(model, exact_tape, ex.inputs, paths);
    nn::Var p_path = exact_tape.constant(1.0);
    for (const auto& t : same.traces) {
      for (std::size_t k = 0; k < t.decisions.size(); ++k) {
        p_path = p_path * (t.decisions[k] ? t.branch_probs[k] : 1.0 - t.branch_probs[k]);
      }
    }
    nn::Var ll = exact_tape.constant(0.0);
    for (int s = 0; s < steps; ++s) {
      ll = ll + nn::bernoulli_log_likelihood(same.logits[static_cast<std::size_t>(s)],
                                             to_vector(ex.targets[static_cast<std::size_t>(s)]));
    }
    objective = objective - p_path * ll;
  }
  model.params().zero_grad();
  exact_tape.backward(objective);
  const auto exact = grads_of(model.params());
  double gap = 0;
  for (const auto& [name, g] : exact) {
    if (name.starts_with("baseline/")) continue;
    gap = std::max(gap, (expected.at(name) - g).cwiseAbs().maxCoeff());
  }
  return gap;
}

Outcome reinforce_unbiased() {
  const double start = cpu_seconds();
  double worst_plain = 0, worst_shifted = 0;
  int cases = 0;
  for (int n : {2, 4}) {
    for (int outputs : {1, 2}) {
      ModelConfig c;
      c.n = n;
      c.b = 2;
      c.b_in = 2;
      c.d = 4;
      c.l = 4;
      c.mlp_hidden = 5;
      Model model(c, static_cast<std::uint64_t>(10 * n + outputs));
      Rng rng(static_cast<std::uint64_t>(n + outputs));
      test::jitter(model.params(), rng, 0.6);
      tasks::Example ex;
      ex.task = TaskId::kReverse;
      ex.data_bits = 2;
      ex.length = 2;
      for (int i = 0; i < 2; ++i) ex.inputs.push_back(to_vector(tasks::random_bits(2, rng)));
      for (int s = 0; s < outputs; ++s) ex.targets.push_back(tasks::random_bits(3, rng));
      ex.scored.assign(ex.targets.size(), true);

      LossOptions opt;
      opt.reward_kind = RewardKind::kLogProb;
      opt.gamma = 1.0;
      opt.alpha = 0;
      opt.learned_baseline = false;
      worst_plain = std::max(worst_plain, unbiasedness_gap(model, ex, opt));

      model.params().at("baseline/weight").value.setZero();
      model.params().at("baseline/bias").value.setConstant(2.5);
      opt.learned_baseline = true;
      opt.baseline_weight = 0;
      worst_shifted = std::max(worst_shifted, unbiasedness_gap(model, ex, opt));
      ++cases;
    }
  }
  const double secs = cpu_seconds() - start;
  return {worst_plain <= kUnbiasedTolerance && worst_shifted <= kUnbiasedTolerance && secs < 60,
          "max gap " + fmt(worst_plain) + " without baseline, " + fmt(worst_shifted) +
              " with constant baseline, " + std::to_string(cases) + " cases, tolerance " +
              fmt(kUnbiasedTolerance)};
}

// ---- 3 ----

Outcome complexity() {
  ModelConfig c = model_config_for(TaskId::kReverse, 4);
  c.n = 2;
  std::vector<int> ns;
  for (int n = 2; n <= 256; n *= 2) ns.push_back(n);
  const auto hard = complexity_probe(Model(c, 1), ns, 2);
  c.attention = Attention::kSoft;
  const auto soft = complexity_probe(Model(c, 1), ns, 3);
  bool ok = true;
  std::string first_bad;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double depth = std::log2(ns[i]);
    const bool hard_ok = hard[i].search_per_access == depth && hard[i].join_per_access == depth;
    const bool soft_ok = soft[i].search_per_access == ns[i] - 1 && soft[i].join_per_access == ns[i] - 1;
    if ((!hard_ok || !soft_ok) && ok) first_bad = " first mismatch at n=" + std::to_string(ns[i]);
    ok = ok && hard_ok && soft_ok;
  }
  return {ok, "hard SEARCH/JOIN per access " + fmt(hard.front().search_per_access) + ".." +
                  fmt(hard.back().search_per_access) + ", soft per step " +
                  fmt(soft.front().search_per_access) + ".." + fmt(soft.back().search_per_access) +
                  " for n=2..256" + first_bad};
}

// ---- 4 ----

Outcome normalization() {
  Rng rng(4);
  double worst = 0;
  const HamSpec spec{3, 6, 5, 8, 1};
  for (int draw = 0; draw < 1000; ++draw) {
    const int n = 1 << (1 + draw % 6);
    nn::ParameterStore store;
    Rng init(static_cast<std::uint64_t>(draw) + 1);
    const HamNetworks nets = HamNetworks::create(store, "ham", spec, init);
    test::jitter(store, rng, 4.0);
    std::vector<nn::Vector> xs;
    for (int i = 0; i < n; ++i) xs.push_back(test::random_vector(3, rng, 0, 1));
    nn::Tape tape;
    TreeMemory mem = init_memory(tape, nets, xs, n);
    const LeafDistribution d = leaf_distribution(mem, nets, tape.constant(test::random_vector(5, rng, -4, 4)));
    double total = 0;
    for (double p : d.probs) total += p;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {worst <= kNormalizationTolerance,
          "max |sum p(e) - 1| = " + fmt(worst) + " over 1000 draws, n=2..64"};
}

// ---- 5 ----

std::vector<Bits> list_simulation(TaskId kind, const std::vector<tasks::DsOp>& ops) {
  std::vector<std::pair<Bits, Bits>> held;  // (priority, value)
  std::vector<Bits> out;
  for (const auto& op : ops) {
    if (op.kind == tasks::DsOp::Kind::kPush) {
      held.emplace_back(op.priority.value_or(Bits{}), op.payload);
      continue;
    }
    std::size_t pick = kind == TaskId::kStack ? held.size() - 1 : 0;
    if (kind == TaskId::kPriorityQueue) {
      for (std::size_t i = 0; i < held.size(); ++i) {
        if (held[i].first > held[pick].first) pick = i;
      }
    }
    out.push_back(held[pick].second);
    held.erase(held.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

Outcome oracle_suites() {
  int mismatches = 0;
  int checked = 0;
  for (TaskId task : {TaskId::kReverse, TaskId::kSearch, TaskId::kMerge, TaskId::kSort, TaskId::kAdd,
                      TaskId::kStack, TaskId::kQueue, TaskId::kPriorityQueue}) {
    Rng rng(5);
    for (int i = 0; i < kOracleExamples; ++i) {
      const tasks::Example ex = tasks::sample_example(task, 1, 32, rng);
      const tasks::Example back = tasks::parse_example(tasks::format_example(ex));
      if (tasks::oracle_targets(ex) != ex.targets || back.targets != ex.targets || back.inputs != ex.inputs) {
        ++mismatches;
      }
      ++checked;
    }
  }
  int sequences = 0;
  for (TaskId kind : {TaskId::kStack, TaskId::kQueue, TaskId::kPriorityQueue}) {
    for (int len = 1; len <= 6; ++len) {
      for (int mask = 0; mask < (1 << len); ++mask) {
        int held = 0, pushes = 0;
        bool valid = true;
        for (int t = 0; t < len; ++t) {
          held += ((mask >> t) & 1) ? -1 : 1;
          pushes += ((mask >> t) & 1) ? 0 : 1;
          valid = valid && held >= 0;
        }
        if (!valid) continue;
        std::vector<int> order(static_cast<std::size_t>(pushes));
        for (int i = 0; i < pushes; ++i) order[static_cast<std::size_t>(i)] = i;
        do {
          std::vector<tasks::DsOp> ops;
          int id = 0;
          for (int t = 0; t < len; ++t) {
            if ((mask >> t) & 1) {
              ops.push_back({tasks::DsOp::Kind::kPop, {}, std::nullopt});
              continue;
            }
            tasks::DsOp push{tasks::DsOp::Kind::kPush, tasks::uint_to_bits(static_cast<std::uint32_t>(id), 5),
                             std::nullopt};
            if (kind == TaskId::kPriorityQueue) {
              push.priority = tasks::uint_to_bits(static_cast<std::uint32_t>(5 * order[static_cast<std::size_t>(id)]), 5);
            }
            ops.push_back(push);
            ++id;
          }
          if (tasks::ds_oracle(kind, ops) != list_simulation(kind, ops)) ++mismatches;
          const tasks::Example ex = tasks::make_ds_example(kind, ops);
          if (tasks::oracle_targets(ex) != ex.targets) ++mismatches;
          ++sequences;
        } while (kind == TaskId::kPriorityQueue && std::next_permutation(order.begin(), order.end()));
      }
    }
  }
  return {mismatches == 0, std::to_string(checked) + " generated examples and " + std::to_string(sequences) +
                               " enumerated data-structure sequences, " + std::to_string(mismatches) +
                               " mismatches"};
}

// ---- training runs ----

struct TrainedModel {
  std::optional<Model> model;
  double cpu = 0;
  int epochs = 0;
  double best_validation = 1;
};

/// Trains epoch by epoch and keeps the latest model with the lowest validation
/// error at full capacity.
TrainedModel train_for_acceptance(RunConfig config, int max_epochs, double budget) {
  const double start = cpu_seconds();
  TrainedModel out;
  TrainerState state = initial_trainer_state(config);
  int last_capacity = 0;
  double last_error = 1;
  const EpochCallback record = [&](const EpochMetrics& m, const TrainerState&, bool) {
    last_capacity = m.capacity;
    last_error = m.validation_error;
  };
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    config.train.epochs = epoch;
    train(config, state, record);
    out.epochs = epoch;
    if (last_capacity == config.model.n && (!out.model || last_error <= out.best_validation)) {
      out.best_validation = last_error;
      out.model = state.model.with_capacity(config.model.n);
    }
    if (cpu_seconds() - start > budget) break;
  }
  out.cpu = cpu_seconds() - start;
  return out;
}

RunConfig reverse_run(Attention attention) {
  RunConfig c;
  c.task = TaskId::kReverse;
  c.data_bits = 4;
  ModelConfig base;
  base.n = 8;
  base.attention = attention;
  c.model = model_config_for(c.task, 4, base);
  c.train.batch_size = 50;
  c.train.validation_batches = 10;
  c.train.curriculum_start = 2;
  c.seed = 1;
  if (attention == Attention::kHard) {
    c.train.batches_per_epoch = 100;
    c.train.lr0 = 3e-3;
    c.train.lr_decay = 0.99;
    c.train.reward_kind = RewardKind::kLogProb;
  } else {
    c.train.batches_per_epoch = 200;
    c.train.lr0 = 3e-3;
    c.train.lr_decay = 1.0;
  }
  return c;
}

std::optional<Model> reverse_model;

Outcome reverse_hard() {
  const TrainedModel t = train_for_acceptance(reverse_run(Attention::kHard), 60, kReverseBudgetSeconds);
  if (!t.model) return {false, "never reached capacity 8 in " + std::to_string(t.epochs) + " epochs"};
  reverse_model = t.model;
  const EvalReport r = evaluate_test(*t.model, TaskId::kReverse, 8, kTestTrials, 606);
  return {r.sequence_error_rate() <= kReverseTestError && t.cpu <= kReverseBudgetSeconds,
          "test error " + fmt(100 * r.sequence_error_rate()) + "% at n=8 over " + std::to_string(kTestTrials) +
              " examples (limit " + fmt(100 * kReverseTestError) + "%), " + std::to_string(t.epochs) +
              " epochs, " + fmt(t.cpu) + " s CPU"};
}

Outcome reverse_generalization() {
  if (!reverse_model) reverse_hard();
  if (!reverse_model) return {false, "no trained Reverse model"};
  const auto before = values_of(reverse_model->params());
  const Model big = reverse_model->with_capacity(32);
  const EvalReport r = evaluate_generalization(*reverse_model, TaskId::kReverse, 8, kTestTrials, 707);
  const bool identical = values_of(big.params()) == before && values_of(reverse_model->params()) == before;
  return {r.sequence_error_rate() <= kGeneralizationError && identical && r.capacity == 32 &&
              r.min_length >= 17 && r.max_length <= 32,
          "error " + fmt(100 * r.sequence_error_rate()) + "% at n=32, lengths " + std::to_string(r.min_length) +
              ".." + std::to_string(r.max_length) + " (limit " + fmt(100 * kGeneralizationError) +
              "%), parameters " + (identical ? "bit-identical" : "CHANGED") + " across capacities"};
}

Outcome dham_reverse() {
  const TrainedModel t = train_for_acceptance(reverse_run(Attention::kSoft), 40, kDhamBudgetSeconds);
  if (!t.model) return {false, "never reached capacity 8 in " + std::to_string(t.epochs) + " epochs"};
  const EvalReport r = evaluate_test(*t.model, TaskId::kReverse, 8, kTestTrials, 808);
  return {r.sequence_error_rate() <= kDhamTestError && t.cpu <= kDhamBudgetSeconds,
          "test error " + fmt(100 * r.sequence_error_rate()) + "% at n=8 over " + std::to_string(kTestTrials) +
              " examples (limit " + fmt(100 * kDhamTestError) + "%), " + std::to_string(t.epochs) +
              " epochs, " + fmt(t.cpu) + " s CPU"};
}

Outcome stack_raw() {
  RunConfig c;
  c.task = TaskId::kStack;
  ModelConfig base;
  base.n = 8;
  c.model = model_config_for(c.task, tasks::kReverseDefaultBits, base);
  c.train.batch_size = 50;
  c.train.batches_per_epoch = 200;
  c.train.validation_batches = 10;
  c.train.lr0 = 1e-3;
  c.train.lr_decay = 0.995;
  c.train.reward_kind = RewardKind::kLogProb;
  c.seed = 1;
  const TrainedModel t = train_for_acceptance(c, 300, kStackBudgetSeconds);
  if (!t.model) return {false, "never reached 8 operations in " + std::to_string(t.epochs) + " epochs"};
  const EvalReport r = evaluate_ds(*t.model, TaskId::kStack, 8, kTestTrials, 909);
  return {r.sequence_error_rate() <= kStackError && t.cpu <= kStackBudgetSeconds,
          "sequence error " + fmt(100 * r.sequence_error_rate()) + "% on 8-operation sequences over " +
              std::to_string(kTestTrials) + " examples (limit " + fmt(100 * kStackError) + "%), " +
              std::to_string(t.epochs) + " epochs, " + fmt(t.cpu) + " s CPU"};
}

// ---- 10 ----

Outcome noisy_stub() {
  Rng noise(10);
  const Predictor flip = [&](const tasks::Example& ex) {
    PredictorOutput out;
    for (const Bits& t : ex.targets) {
      if (tasks::is_end_target(t)) continue;
      Bits s(t.begin(), t.end() - 1);
      for (auto& bit : s) bit ^= static_cast<std::uint8_t>(bernoulli(noise, 0.01));
      out.symbols.push_back(s);
    }
    return out;
  };
  // 32 symbols of 10 bits: 320 output bits per example.
  const auto examples = sample_examples(TaskId::kReverse, 10, 32, 32, kNoisyTrials, 11);
  const EvalReport r = evaluate_examples(flip, examples);
  const double rate = r.sequence_error_rate();
  return {std::abs(rate - kNoisyTarget) <= kNoisyTolerance,
          "whole-sequence error " + fmt(100 * rate) + "% over " + std::to_string(kNoisyTrials) +
              " trials (target " + fmt(100 * kNoisyTarget) + " +- " + fmt(100 * kNoisyTolerance) + "%)"};
}

// ---- 11 ----

int shell(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("ham_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string bin = std::string("HAM_LOG=quiet ") + HAM_BINARY;
  const std::string train_args =
      " train --task reverse --b 4 --n 8 --epochs 4 --batch-size 10 --threads 1 --seed 5"
      " --set batches_per_epoch=5 --set validation_batches=2 --out ";
  std::vector<std::string> failures;
  for (const char* run : {"hard", "soft"}) {
    const std::string extra = std::string(run) == "soft" ? " --attention soft" : "";
    for (const char* copy : {"a", "b"}) {
      const fs::path out = dir / (std::string(run) + copy);
      if (shell(bin + train_args + out.string() + extra) != 0) failures.push_back(std::string(run) + " train failed");
      const std::string ckpt = (out / "checkpoint_last.ham").string();
      if (shell(bin + " eval " + ckpt + " --trials 200 --seed 3 --report " + (out / "report.csv").string() +
                " > " + (out / "summary.txt").string()) != 0) {
        failures.push_back(std::string(run) + " eval failed");
      }
      if (shell(bin + " gen --task reverse --count 50 --seed 2 --out " +
                (out / "data.tsv").string()) != 0) {
        failures.push_back("gen failed");
      }
    }
    for (const char* file : {"metrics.csv", "checkpoint_last.ham", "checkpoint_best.ham", "config.txt",
                             "report.csv", "summary.txt", "data.tsv"}) {
      const fs::path a = dir / (std::string(run) + "a") / file;
      const fs::path b = dir / (std::string(run) + "b") / file;
      if (!fs::exists(a) || slurp(a) != slurp(b)) failures.push_back(std::string(run) + "/" + file + " differs");
    }
  }
  fs::remove_all(dir);
  std::string detail = "train, eval and gen repeated with the same seed: ";
  if (failures.empty()) return {true, detail + "all 14 artifacts byte-identical"};
  for (const auto& f : failures) detail += f + "; ";
  return {false, detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "dham-gradient", dham_gradient},
      {2, "reinforce-unbiased", reinforce_unbiased},
      {3, "access-complexity", complexity},
      {4, "leaf-normalization", normalization},
      {5, "task-oracles", oracle_suites},
      {6, "reverse-hard-n8", reverse_hard},
      {7, "reverse-generalization-n32", reverse_generalization},
      {8, "reverse-dham-n8", dham_reverse},
      {9, "stack-raw", stack_raw},
      {10, "noisy-stub-error", noisy_stub},
      {11, "determinism", cli_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
