#pragma once

#include "ham/model.hpp"
#include "ham/tasks.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ham {

/// Predicted data symbols for one example (end symbol stripped), plus the
/// number of SEARCH evaluations spent producing them.
struct PredictorOutput {
  std::vector<tasks::Bits> symbols;
  std::int64_t search_calls = 0;
};

using Predictor = std::function<PredictorOutput(const tasks::Example&)>;

/// Greedy deterministic inference with `model` at its configured capacity.
Predictor model_predictor(const Model& model);

/// Wrong and total bits of one example. For controller tasks the prediction
/// is re-terminated with the end symbol and compared position by position;
/// missing or extra symbols count as fully wrong. For data-structure tasks only
/// POP answers are compared.
struct ExampleScore {
  bool correct = true;
  std::int64_t wrong_bits = 0;
  std::int64_t total_bits = 0;
};
ExampleScore score_example(const tasks::Example& example, const std::vector<tasks::Bits>& predicted);

struct EvalReport {
  std::string kind;  // test, generalize, ds
  tasks::TaskId task = tasks::TaskId::kReverse;
  int capacity = 0;
  int min_length = 0;
  int max_length = 0;
  int num_examples = 0;
  int sequence_errors = 0;
  std::int64_t wrong_bits = 0;
  std::int64_t total_bits = 0;
  std::int64_t output_symbols = 0;
  std::int64_t search_calls = 0;

  double sequence_error_rate() const;
  double bit_error_rate() const;
  double search_per_output() const;
};

/// Scores `predictor` on the given examples.
EvalReport evaluate_examples(const Predictor& predictor, std::span<const tasks::Example> examples);

/// `trials` examples with lengths uniform in [lo, hi].
std::vector<tasks::Example> sample_examples(tasks::TaskId task, int data_bits, int lo, int hi,
                                            int trials, std::uint64_t seed);

/// Test error: tree of n leaves, lengths uniform in [1, n].
EvalReport evaluate_test(const Model& model, tasks::TaskId task, int n, int trials,
                         std::uint64_t seed);

/// Generalization error: the same parameters on 4 n_train leaves, lengths
/// uniform in [2 n_train + 1, 4 n_train].
EvalReport evaluate_generalization(const Model& model, tasks::TaskId task, int n_train, int trials,
                                   std::uint64_t seed);

/// Data-structure error: sequences of exactly n_ops operations on a tree of
/// n_ops leaves; a sequence is wrong if any POP answer has a wrong bit.
EvalReport evaluate_ds(const Model& model, tasks::TaskId kind, int n_ops, int trials,
                       std::uint64_t seed);

struct ComplexityRow {
  int n = 0;
  double search_per_access = 0;
  double join_per_access = 0;
  double write_per_access = 0;
};

/// Runs one episode per capacity and divides the counters spent after
/// initialization by the number of attention steps.
std::vector<ComplexityRow> complexity_probe(const Model& model, std::span<const int> n_values,
                                            std::uint64_t seed);

/// Text trace of one greedy run: '#' header lines, then per attention step
/// "step<TAB>leaf<TAB>decisions<TAB>probabilities" with 1-based step and leaf
/// ordinal, decisions over {L,R} and probabilities to 4 decimals. Soft
/// attention prints "soft" and the leaf distribution, with the most likely
/// leaf. With `dump_nodes`, every step is followed by 2n-1 "node" lines.
std::string format_trace(const tasks::Example& example, const Prediction& prediction,
                         int leaf_count, bool dump_nodes);

std::string report_csv_header();
std::string report_csv_row(const EvalReport& report);
std::string report_summary(const EvalReport& report);

}  // namespace ham
