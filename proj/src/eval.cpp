#include "ham/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace ham {

namespace {

int data_bits_of(const Model& model, tasks::TaskId task) {
  return task == tasks::TaskId::kReverse ? model.config().b : tasks::kReverseDefaultBits;
}

void check_task(const Model& model, tasks::TaskId task) {
  const auto shape = tasks::task_shape(task, data_bits_of(model, task));
  const ModelConfig& c = model.config();
  if (c.b != shape.output_bits || c.b_in != shape.input_width ||
      (c.mode == ModelMode::kRaw) != tasks::is_data_structure(task)) {
    throw ConfigError("model does not fit task " + tasks::to_string(task));
  }
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

}  // namespace

Predictor model_predictor(const Model& model) {
  return [&model](const tasks::Example& example) {
    thread_local nn::Tape tape;
    tape.clear();
    const auto inputs = encode_inputs(model.config(), example);
    Prediction p = predict_with_trace(model, tape, inputs);
    PredictorOutput out{std::move(p.symbols), p.episode.counters.search};
    tape.clear();
    return out;
  };
}

ExampleScore score_example(const tasks::Example& example, const std::vector<tasks::Bits>& predicted) {
  ExampleScore s;
  if (tasks::is_data_structure(example.task)) {
    for (std::size_t t = 0; t < example.targets.size(); ++t) {
      if (!example.scored.empty() && !example.scored[t]) continue;
      const auto& target = example.targets[t];
      s.total_bits += static_cast<std::int64_t>(target.size());
      if (t >= predicted.size() || predicted[t].size() != target.size()) {
        s.wrong_bits += static_cast<std::int64_t>(target.size());
        continue;
      }
      for (std::size_t j = 0; j < target.size(); ++j) s.wrong_bits += predicted[t][j] != target[j];
    }
    s.correct = s.wrong_bits == 0;
    return s;
  }

  const std::size_t width = example.targets.front().size();
  std::vector<tasks::Bits> full;
  full.reserve(predicted.size() + 1);
  for (const auto& symbol : predicted) full.push_back(tasks::data_target(symbol));
  full.push_back(tasks::end_target(static_cast<int>(width) - 1));

  const std::size_t positions = std::max(full.size(), example.targets.size());
  s.total_bits = static_cast<std::int64_t>(positions * width);
  for (std::size_t t = 0; t < positions; ++t) {
    if (t >= full.size() || t >= example.targets.size() || full[t].size() != width) {
      s.wrong_bits += static_cast<std::int64_t>(width);
      continue;
    }
    for (std::size_t j = 0; j < width; ++j) s.wrong_bits += full[t][j] != example.targets[t][j];
  }
  s.correct = s.wrong_bits == 0;
  return s;
}

double EvalReport::sequence_error_rate() const {
  return num_examples == 0 ? 0.0 : static_cast<double>(sequence_errors) / num_examples;
}

double EvalReport::bit_error_rate() const {
  return total_bits == 0 ? 0.0 : static_cast<double>(wrong_bits) / static_cast<double>(total_bits);
}

double EvalReport::search_per_output() const {
  return output_symbols == 0 ? 0.0
                             : static_cast<double>(search_calls) / static_cast<double>(output_symbols);
}

EvalReport evaluate_examples(const Predictor& predictor, std::span<const tasks::Example> examples) {
  EvalReport r;
  r.min_length = examples.empty() ? 0 : examples.front().length;
  for (const auto& ex : examples) {
    if (r.num_examples == 0) r.task = ex.task;
    const PredictorOutput out = predictor(ex);
    const ExampleScore s = score_example(ex, out.symbols);
    ++r.num_examples;
    r.sequence_errors += s.correct ? 0 : 1;
    r.wrong_bits += s.wrong_bits;
    r.total_bits += s.total_bits;
    r.output_symbols += static_cast<std::int64_t>(out.symbols.size());
    r.search_calls += out.search_calls;
    r.min_length = std::min(r.min_length, ex.length + ex.length2);
    r.max_length = std::max(r.max_length, ex.length + ex.length2);
  }
  return r;
}

std::vector<tasks::Example> sample_examples(tasks::TaskId task, int data_bits, int lo, int hi,
                                            int trials, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<tasks::Example> out;
  out.reserve(static_cast<std::size_t>(std::max(trials, 0)));
  for (int i = 0; i < trials; ++i) out.push_back(tasks::sample_example(task, lo, hi, rng, data_bits));
  return out;
}

EvalReport evaluate_test(const Model& model, tasks::TaskId task, int n, int trials,
                         std::uint64_t seed) {
  check_task(model, task);
  const Model sized = model.with_capacity(n);
  const auto examples = sample_examples(task, data_bits_of(model, task), 1, n, trials, seed);
  EvalReport r = evaluate_examples(model_predictor(sized), examples);
  r.kind = "test";
  r.task = task;
  r.capacity = n;
  return r;
}

EvalReport evaluate_generalization(const Model& model, tasks::TaskId task, int n_train, int trials,
                                   std::uint64_t seed) {
  check_task(model, task);
  const Model sized = model.with_capacity(4 * n_train);
  const auto examples =
      sample_examples(task, data_bits_of(model, task), 2 * n_train + 1, 4 * n_train, trials, seed);
  EvalReport r = evaluate_examples(model_predictor(sized), examples);
  r.kind = "generalize";
  r.task = task;
  r.capacity = 4 * n_train;
  return r;
}

EvalReport evaluate_ds(const Model& model, tasks::TaskId kind, int n_ops, int trials,
                       std::uint64_t seed) {
  check_task(model, kind);
  if (!tasks::is_data_structure(kind)) throw ConfigError("evaluate_ds needs a data-structure task");
  const Model sized = model.with_capacity(n_ops);
  Rng rng(seed);
  std::vector<tasks::Example> examples;
  examples.reserve(static_cast<std::size_t>(std::max(trials, 0)));
  for (int i = 0; i < trials; ++i) examples.push_back(tasks::gen_ds(kind, n_ops, rng));
  EvalReport r = evaluate_examples(model_predictor(sized), examples);
  r.kind = "ds";
  r.task = kind;
  r.capacity = n_ops;
  return r;
}

std::vector<ComplexityRow> complexity_probe(const Model& model, std::span<const int> n_values,
                                            std::uint64_t seed) {
  std::vector<ComplexityRow> rows;
  Rng rng(seed);
  nn::Tape tape;
  for (const int n : n_values) {
    const Model sized = model.with_capacity(n);
    const ModelConfig& c = sized.config();
    const int length = c.mode == ModelMode::kController ? n : std::min(n, 8);
    std::vector<nn::Vector> inputs;
    for (int i = 0; i < length; ++i) {
      nn::Vector x(c.b_in);
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = bernoulli(rng, 0.5) ? 1.0 : 0.0;
      inputs.push_back(x);
    }
    tape.clear();
    EpisodeOptions options;
    options.max_outputs = 4;
    const EpisodeOutput ep = run_episode(sized, tape, inputs, GreedyMode{}, options);
    const auto initial_joins = c.mode == ModelMode::kController ? n - 1 : 0;
    const double steps = ep.attention_steps;
    rows.push_back({n, static_cast<double>(ep.counters.search) / steps,
                    static_cast<double>(ep.counters.join - initial_joins) / steps,
                    static_cast<double>(ep.counters.write) / steps});
  }
  return rows;
}

std::string format_trace(const tasks::Example& example, const Prediction& prediction,
                         int leaf_count, bool dump_nodes) {
  std::ostringstream out;
  out << "# example\t" << tasks::format_example(example) << '\n';
  out << "# capacity\t" << leaf_count << '\n';
  out << "# predicted\t";
  for (std::size_t i = 0; i < prediction.symbols.size(); ++i) {
    out << (i ? " " : "") << tasks::bits_to_string(prediction.symbols[i]);
  }
  out << '\n';
  out << "# correct\t" << (score_example(example, prediction.symbols).correct ? 1 : 0) << '\n';
  out << std::fixed << std::setprecision(4);
  const EpisodeOutput& ep = prediction.episode;
  for (int s = 0; s < ep.attention_steps; ++s) {
    const auto i = static_cast<std::size_t>(s);
    out << s + 1 << '\t';
    std::vector<double> probs;
    if (!ep.traces.empty()) {
      out << ep.traces[i].leaf_ordinal(leaf_count) + 1 << '\t' << ep.traces[i].decision_string();
      probs = ep.traces[i].probabilities;
    } else {
      probs = ep.distributions[i].probs;
      const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
      out << best + 1 << "\tsoft";
    }
    out << '\t';
    for (std::size_t k = 0; k < probs.size(); ++k) out << (k ? " " : "") << probs[k];
    out << '\n';
    if (dump_nodes) {
      const auto& nodes = ep.node_dumps.at(i);
      for (std::size_t e = 1; e < nodes.size(); ++e) {
        out << "node\t" << e << '\t';
        for (Eigen::Index k = 0; k < nodes[e].size(); ++k) out << (k ? " " : "") << nodes[e](k);
        out << '\n';
      }
    }
  }
  return out.str();
}

std::string report_csv_header() {
  return "kind,task,capacity,min_length,max_length,num_examples,sequence_errors,"
         "sequence_error_rate,wrong_bits,total_bits,bit_error_rate,search_per_output";
}

std::string report_csv_row(const EvalReport& r) {
  std::ostringstream out;
  out << r.kind << ',' << tasks::to_string(r.task) << ',' << r.capacity << ',' << r.min_length
      << ',' << r.max_length << ',' << r.num_examples << ',' << r.sequence_errors << ','
      << fmt(r.sequence_error_rate()) << ',' << r.wrong_bits << ',' << r.total_bits << ','
      << fmt(r.bit_error_rate()) << ',' << fmt(r.search_per_output());
  return out.str();
}

std::string report_summary(const EvalReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "task            " << tasks::to_string(r.task) << " (" << r.kind << ")\n"
      << "capacity        " << r.capacity << '\n'
      << "lengths         " << r.min_length << ".." << r.max_length << '\n'
      << "examples        " << r.num_examples << '\n'
      << "sequence error  " << 100.0 * r.sequence_error_rate() << "% (" << r.sequence_errors
      << " wrong)\n"
      << "bit error       " << 100.0 * r.bit_error_rate() << "%\n"
      << "SEARCH/output   " << r.search_per_output() << '\n';
  return out.str();
}

}  // namespace ham
