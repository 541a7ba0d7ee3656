#pragma once

#include "ham/nn/types.hpp"
#include "ham/random.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ham::tasks {

enum class TaskId { kReverse, kSearch, kMerge, kSort, kAdd, kStack, kQueue, kPriorityQueue };

std::string to_string(TaskId task);
/// Accepts the lower-case names used by the CLI ("reverse", "pqueue", ...).
TaskId parse_task(const std::string& name);
/// Stack, Queue and PriorityQueue run on the controller-free model.
bool is_data_structure(TaskId task);

/// A bit vector, most significant bit first.
using Bits = std::vector<std::uint8_t>;

inline constexpr int kFieldBits = 5;            // keys, values and priorities
inline constexpr int kReverseDefaultBits = 10;
inline constexpr int kMergePriorityLevels = 300;

/// Input and output widths of a task.
struct TaskShape {
  int input_width = 0;   // b_in
  int output_bits = 0;   // b, excluding the end-of-output bit
};

/// `data_bits` only affects Reverse (symbol width); other tasks use 5-bit fields.
TaskShape task_shape(TaskId task, int data_bits = kReverseDefaultBits);

/// One input/output pair.
///
/// Controller tasks: every target is b data bits followed by the end-of-output
/// bit; the last target is the end symbol (data bits 0, end bit 1).
/// Data-structure tasks: one b-bit target per operation; `scored` marks POPs.
struct Example {
  TaskId task = TaskId::kReverse;
  int length = 0;   // input symbols; first sequence for Merge; operand bits for Add; ops for DS
  int length2 = 0;  // second sequence length (Merge only)
  int data_bits = kReverseDefaultBits;
  std::vector<nn::Vector> inputs;
  std::vector<Bits> targets;
  std::vector<bool> scored;
};

/// Encodes a data symbol or the end symbol as a (b+1)-bit target.
Bits data_target(const Bits& data);
Bits end_target(int output_bits);
bool is_end_target(const Bits& target);

// Generators. All sample from the explicit rng only.
Example gen_reverse(int m, Rng& rng, int data_bits = kReverseDefaultBits);
/// m symbols: m-1 key/value pairs sorted by key, then the query.
Example gen_search(int m, Rng& rng);
Example gen_merge(int m, int m2, Rng& rng);
Example gen_sort(int m, Rng& rng);
/// Two m-bit operands, least significant bit first.
Example gen_add(int m, Rng& rng);

struct DsOp {
  enum class Kind { kPush, kPop };
  Kind kind = Kind::kPush;
  Bits payload;                  // PUSH only
  std::optional<Bits> priority;  // PriorityQueue PUSH only
};

/// op t (1-based) is POP with probability t/n_ops, PUSH otherwise; a POP drawn
/// on an empty structure becomes a PUSH. Priorities are distinct within the
/// sequence while unused 5-bit values remain, and always distinct among the
/// elements held at the same time.
std::vector<DsOp> gen_ds_sequence(TaskId kind, int n_ops, Rng& rng);
/// Expected value of every POP, in order. Throws UsageError on an empty POP.
std::vector<Bits> ds_oracle(TaskId kind, const std::vector<DsOp>& ops);
/// Encodes a data-structure sequence as an Example (targets from ds_oracle).
Example make_ds_example(TaskId kind, const std::vector<DsOp>& ops);
Example gen_ds(TaskId kind, int n_ops, Rng& rng);

/// Smallest input length for which the task is defined.
int min_length(TaskId task);
/// Draws an input length uniformly from [max(lo, min_length), hi] and builds a
/// matching example whose input fits in `hi` symbols.
Example sample_example(TaskId task, int lo, int hi, Rng& rng,
                       int data_bits = kReverseDefaultBits);

/// Recomputes the targets of an example from its encoded inputs with the
/// plain reference algorithms (reversal, linear scan, two-finger merge,
/// insertion sort, schoolbook addition, list-based data structures).
std::vector<Bits> oracle_targets(const Example& example);

// Line-oriented dataset format:
//   task <TAB> length <TAB> input tokens <TAB> target tokens
// Tokens are space separated, bit vectors MSB-left, priorities as decimals.
std::string dataset_header();
std::string format_example(const Example& example);
Example parse_example(const std::string& line);

// Low-level helpers shared with the model and evaluation code.
Bits random_bits(int width, Rng& rng);
std::string bits_to_string(const Bits& bits);
Bits bits_from_string(const std::string& s);
std::uint32_t bits_to_uint(const Bits& bits);
Bits uint_to_bits(std::uint32_t value, int width);

}  // namespace ham::tasks
