// ham: train, evaluate, trace and generate data for hierarchical attentive memory models.

#include "ham/checkpoint.hpp"
#include "ham/eval.hpp"
#include "ham/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace ham;

namespace {

enum ExitCode { kOk = 0, kConfigFailure = 1, kNumericalFailure = 2 };

// 0 quiet, 1 per-epoch progress (default), 2 also per-run details.
int log_level() {
  const char* env = std::getenv("HAM_LOG");
  if (env == nullptr) return 1;
  const std::string v = env;
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void log(int level, const std::string& message) {
  if (log_level() >= level) std::cerr << message << '\n';
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

/// Flags shared by every command that builds a model configuration.
struct ModelFlags {
  std::optional<std::string> task;
  std::optional<int> n;
  std::optional<int> b;
  std::optional<int> eta;
  std::optional<std::string> attention;
  std::optional<std::string> mode;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--task", f.task, "reverse|search|merge|sort|add|stack|queue|pqueue");
  cmd->add_option("--n", f.n, "tree capacity (power of two)");
  cmd->add_option("--b", f.b, "data bits per symbol (Reverse)");
  cmd->add_option("--eta", f.eta, "memory accesses per output symbol");
  cmd->add_option("--attention", f.attention, "hard|soft");
  cmd->add_option("--mode", f.mode, "controller|raw");
}

struct TrainFlags {
  ModelFlags model;
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out = "run";
  bool resume = false;
};

/// Resolves a run configuration: config file, then flags, then --set.
/// Widths and mode follow the task unless given explicitly.
RunConfig resolve_config(const TrainFlags& f) {
  RunConfig c;
  std::string file_text;
  if (!f.config_path.empty()) {
    file_text = read_file(f.config_path);
    apply_key_values(c, file_text);
  }
  const ModelFlags& m = f.model;
  if (m.task) c.task = tasks::parse_task(*m.task);
  if (m.b) {
    if (c.task != tasks::TaskId::kReverse && *m.b != tasks::task_shape(c.task).output_bits) {
      throw ConfigError("--b only applies to reverse; " + tasks::to_string(c.task) + " uses " +
                        std::to_string(tasks::task_shape(c.task).output_bits) + " bits");
    }
    c.data_bits = *m.b;
  }

  auto explicitly = [&](const std::string& key) {
    for (const auto& s : f.settings) {
      if (s.rfind(key + "=", 0) == 0 || s.rfind(key + " ", 0) == 0) return true;
    }
    std::istringstream lines(file_text);
    std::string line;
    while (std::getline(lines, line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first != std::string::npos && line.compare(first, key.size(), key) == 0) {
        const auto rest = line.find_first_not_of(" \t", first + key.size());
        if (rest != std::string::npos && line[rest] == '=') return true;
      }
    }
    return false;
  };
  const int file_eta = c.model.eta;
  const ModelMode file_mode = c.model.mode;
  c.model = model_config_for(c.task, c.data_bits, c.model);
  if (explicitly("eta")) c.model.eta = file_eta;
  if (explicitly("mode")) c.model.mode = file_mode;

  if (m.n) c.model.n = *m.n;
  if (m.eta) c.model.eta = *m.eta;
  if (m.attention) c.model.attention = parse_attention(*m.attention);
  if (m.mode) c.model.mode = parse_mode(*m.mode);
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.batch_size) c.train.batch_size = *f.batch_size;
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  for (const auto& s : f.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.train.curriculum_start > c.model.n) c.train.curriculum_start = c.model.n;
  c.validate();
  return c;
}

int cmd_train(const TrainFlags& f) {
  const fs::path out = f.out;
  fs::create_directories(out);
  const fs::path last = out / "checkpoint_last.ham";
  const fs::path best = out / "checkpoint_best.ham";
  const fs::path metrics = out / "metrics.csv";

  RunConfig config;
  TrainerState state = [&] {
    if (f.resume) {
      const Checkpoint ckpt = load_checkpoint(last);
      config = ckpt.config;
      if (f.epochs) config.train.epochs = *f.epochs;
      return restore_trainer_state(ckpt);
    }
    config = resolve_config(f);
    return initial_trainer_state(config);
  }();
  write_file(out / "config.txt", to_key_values(config));
  if (!f.resume) write_file(metrics, metrics_header(config.model.attention) + '\n');

  log(2, "resolved configuration:\n" + to_key_values(config));
  log(1, "training " + tasks::to_string(config.task) + " (" + to_string(config.model.attention) +
             " attention, n=" + std::to_string(config.model.n) + ") into " + out.string());
  const auto start = std::chrono::steady_clock::now();
  train(config, state, [&](const EpochMetrics& m, const TrainerState& s, bool improved) {
    std::ofstream(metrics, std::ios::app) << metrics_row(m, config.model.attention) << '\n';
    if (improved) save_checkpoint(best, config, s);
    if ((m.epoch + 1) % config.checkpoint_every == 0 || s.next_epoch == config.train.epochs) {
      save_checkpoint(last, config, s);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << "epoch " << m.epoch << "  n=" << m.capacity << "  cost=" << m.train_cost
         << "  val_err=" << m.validation_error << (improved ? " *" : "") << "  " << secs << "s";
    log(1, line.str());
  });
  if (state.best_capacity > 0) {
    log(1, "best validation error " + std::to_string(state.best_error) + " at n=" +
               std::to_string(state.best_capacity));
  }
  return kOk;
}

struct EvalFlags {
  std::string checkpoint;
  std::optional<std::string> task;
  std::string mode = "test";
  std::optional<int> n;
  int trials = 2500;
  std::uint64_t seed = 1;
  std::string report;
};

int cmd_eval(const EvalFlags& f) {
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  if (f.task && tasks::parse_task(*f.task) != ckpt.config.task) {
    throw ConfigError("checkpoint was trained on " + tasks::to_string(ckpt.config.task) +
                      ", not " + *f.task);
  }
  const Model model(ckpt.config.model, ckpt.params);
  const int n = f.n.value_or(ckpt.config.model.n);
  const auto task = ckpt.config.task;
  EvalReport report;
  if (f.mode == "test") {
    report = evaluate_test(model, task, n, f.trials, f.seed);
  } else if (f.mode == "generalize") {
    report = evaluate_generalization(model, task, n, f.trials, f.seed);
  } else if (f.mode == "ds") {
    report = evaluate_ds(model, task, n, f.trials, f.seed);
  } else {
    throw ConfigError("eval mode must be test, generalize or ds");
  }
  std::cout << report_summary(report);
  if (!f.report.empty()) write_file(f.report, report_csv_header() + '\n' + report_csv_row(report) + '\n');
  return kOk;
}

struct TraceFlags {
  std::string checkpoint;
  std::uint64_t seed = 1;
  std::optional<int> length;
  std::string example;
  bool dump_nodes = false;
  std::string out;
};

int cmd_trace(const TraceFlags& f) {
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const Model model(ckpt.config.model, ckpt.params);
  tasks::Example ex;
  if (!f.example.empty()) {
    ex = tasks::parse_example(f.example);
    if (ex.task != ckpt.config.task) throw ConfigError("example task does not match the checkpoint");
  } else {
    Rng rng(f.seed);
    const int len = f.length.value_or(model.config().n);
    ex = tasks::is_data_structure(ckpt.config.task)
             ? tasks::gen_ds(ckpt.config.task, len, rng)
             : tasks::sample_example(ckpt.config.task, len, len, rng, ckpt.config.data_bits);
  }
  int n = model.config().n;
  while (n < static_cast<int>(ex.inputs.size())) n *= 2;
  const Model sized = model.with_capacity(n);

  nn::Tape tape;
  const auto inputs = encode_inputs(sized.config(), ex);
  const Prediction p = predict_with_trace(sized, tape, inputs, f.dump_nodes);
  const std::string text = format_trace(ex, p, n, f.dump_nodes);
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_file(f.out, text);
  }
  return kOk;
}

struct GenFlags {
  std::string task = "reverse";
  int count = 100;
  std::uint64_t seed = 1;
  int n = 32;
  std::optional<int> min_length;
  std::optional<int> max_length;
  int b = tasks::kReverseDefaultBits;
  std::string out;
};

int cmd_gen(const GenFlags& f) {
  const auto task = tasks::parse_task(f.task);
  if (f.count < 0) throw ConfigError("--count must be non-negative");
  if (f.b < 1) throw ConfigError("--b must be positive");
  const int lo = f.min_length.value_or(1);
  const int hi = f.max_length.value_or(f.n);
  if (lo > hi || hi < tasks::min_length(task)) throw ConfigError("empty length range");
  Rng rng(f.seed);
  std::ostringstream text;
  text << tasks::dataset_header() << '\n';
  for (int i = 0; i < f.count; ++i) {
    text << tasks::format_example(tasks::sample_example(task, lo, hi, rng, f.b)) << '\n';
  }
  if (f.out.empty()) {
    std::cout << text.str();
  } else {
    write_file(f.out, text.str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical attentive memory: training, evaluation and data generation"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "run curriculum training");
  add_model_flags(train_cmd, train_flags.model);
  train_cmd->add_option("--config", train_flags.config_path, "key = value configuration file");
  train_cmd->add_option("--set", train_flags.settings, "override one setting, key=value");
  train_cmd->add_option("--epochs", train_flags.epochs);
  train_cmd->add_option("--batch-size", train_flags.batch_size);
  train_cmd->add_option("--seed", train_flags.seed);
  train_cmd->add_option("--threads", train_flags.threads);
  train_cmd->add_option("--out", train_flags.out, "run directory");
  train_cmd->add_flag("--resume", train_flags.resume, "continue from <out>/checkpoint_last.ham");

  EvalFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("checkpoint", eval_flags.checkpoint)->required();
  eval_cmd->add_option("--task", eval_flags.task, "must match the checkpoint");
  eval_cmd->add_option("--mode", eval_flags.mode, "test|generalize|ds");
  eval_cmd->add_option("--n", eval_flags.n, "training capacity (default: from checkpoint)");
  eval_cmd->add_option("--trials", eval_flags.trials);
  eval_cmd->add_option("--seed", eval_flags.seed);
  eval_cmd->add_option("--report", eval_flags.report, "CSV report path");

  TraceFlags trace_flags;
  auto* trace_cmd = app.add_subcommand("trace", "show the attention of one greedy run");
  trace_cmd->add_option("checkpoint", trace_flags.checkpoint)->required();
  trace_cmd->add_option("--seed", trace_flags.seed, "seed of the random example");
  trace_cmd->add_option("--length", trace_flags.length, "length of the random example");
  trace_cmd->add_option("--example", trace_flags.example, "dataset line to trace instead");
  trace_cmd->add_flag("--dump-nodes", trace_flags.dump_nodes, "include every node value");
  trace_cmd->add_option("--out", trace_flags.out, "output path (default stdout)");

  GenFlags gen_flags;
  auto* gen_cmd = app.add_subcommand("gen", "write a dataset");
  gen_cmd->add_option("--task", gen_flags.task);
  gen_cmd->add_option("--count", gen_flags.count);
  gen_cmd->add_option("--seed", gen_flags.seed);
  gen_cmd->add_option("--n", gen_flags.n, "upper length bound");
  gen_cmd->add_option("--min-length", gen_flags.min_length);
  gen_cmd->add_option("--max-length", gen_flags.max_length);
  gen_cmd->add_option("--b", gen_flags.b, "data bits (Reverse)");
  gen_cmd->add_option("--out", gen_flags.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigFailure;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_flags);
    if (eval_cmd->parsed()) return cmd_eval(eval_flags);
    if (trace_cmd->parsed()) return cmd_trace(trace_flags);
    if (gen_cmd->parsed()) return cmd_gen(gen_flags);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  }
  return kConfigFailure;
}
