#include "ham/tasks.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stack>
#include <utility>

namespace ham::tasks {

namespace {

using Pair = std::pair<Bits, Bits>;  // key/priority-less pair: (key, value)

struct Prioritized {
  int level = 1;  // priority = level / 300
  Bits value;
};

nn::Vector encode_bits(const Bits& bits, int width, int offset = 0, nn::Vector v = {}) {
  if (v.size() == 0) v = nn::Vector::Zero(width);
  for (std::size_t j = 0; j < bits.size(); ++j) v(offset + static_cast<Eigen::Index>(j)) = bits[j];
  return v;
}

Bits decode_bits(const nn::Vector& v, int offset, int count) {
  Bits out(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) out[static_cast<std::size_t>(j)] = v(offset + j) > 0.5 ? 1 : 0;
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty() || sep != ' ') out.push_back(cur);
  }
  return out;
}

std::string format_priority(double p) {
  std::ostringstream out;
  out << std::setprecision(17) << p;
  return out.str();
}

int priority_level(double p) {
  const int level = static_cast<int>(std::lround(p * kMergePriorityLevels));
  require(level >= 1 && level <= kMergePriorityLevels &&
              static_cast<double>(level) / kMergePriorityLevels == p,
          "priority " + format_priority(p) + " is not a multiple of 1/300");
  return level;
}

// ---- example builders (production path) ----

Example make_reverse_example(const std::vector<Bits>& symbols, int data_bits) {
  Example ex;
  ex.task = TaskId::kReverse;
  ex.data_bits = data_bits;
  ex.length = static_cast<int>(symbols.size());
  for (const Bits& s : symbols) ex.inputs.push_back(encode_bits(s, data_bits));
  for (auto it = symbols.rbegin(); it != symbols.rend(); ++it) ex.targets.push_back(data_target(*it));
  ex.targets.push_back(end_target(data_bits));
  ex.scored.assign(ex.targets.size(), true);
  return ex;
}

Example make_search_example(const std::vector<Pair>& pairs, const Bits& query) {
  Example ex;
  ex.task = TaskId::kSearch;
  ex.length = static_cast<int>(pairs.size()) + 1;
  const int width = task_shape(TaskId::kSearch).input_width;
  for (const auto& [key, value] : pairs) {
    ex.inputs.push_back(encode_bits(value, width, kFieldBits, encode_bits(key, width)));
  }
  nn::Vector q = encode_bits(query, width);
  q(width - 1) = 1.0;
  ex.inputs.push_back(q);
  // Keys are sorted, so the first key not less than the query is the match.
  const auto it = std::lower_bound(pairs.begin(), pairs.end(), query,
                                   [](const Pair& p, const Bits& k) { return p.first < k; });
  require(it != pairs.end() && it->first == query, "search query is not among the keys");
  ex.targets.push_back(data_target(it->second));
  ex.targets.push_back(end_target(kFieldBits));
  ex.scored.assign(ex.targets.size(), true);
  return ex;
}

Example make_merge_example(const std::vector<Prioritized>& first,
                           const std::vector<Prioritized>& second) {
  Example ex;
  ex.task = TaskId::kMerge;
  ex.length = static_cast<int>(first.size());
  ex.length2 = static_cast<int>(second.size());
  const int width = task_shape(TaskId::kMerge).input_width;
  std::vector<Prioritized> all;
  for (const auto* seq : {&first, &second}) {
    for (const Prioritized& e : *seq) {
      nn::Vector v = encode_bits(e.value, width, 1);
      v(0) = static_cast<double>(e.level) / kMergePriorityLevels;
      ex.inputs.push_back(v);
      all.push_back(e);
    }
  }
  std::sort(all.begin(), all.end(),
            [](const Prioritized& a, const Prioritized& b) { return a.level < b.level; });
  for (const Prioritized& e : all) ex.targets.push_back(data_target(e.value));
  ex.targets.push_back(end_target(kFieldBits));
  ex.scored.assign(ex.targets.size(), true);
  return ex;
}

Example make_sort_example(const std::vector<Pair>& pairs) {
  Example ex;
  ex.task = TaskId::kSort;
  ex.length = static_cast<int>(pairs.size());
  const int width = task_shape(TaskId::kSort).input_width;
  for (const auto& [key, value] : pairs) {
    ex.inputs.push_back(encode_bits(value, width, kFieldBits, encode_bits(key, width)));
  }
  std::vector<Pair> sorted = pairs;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Pair& a, const Pair& b) { return a.first < b.first; });
  for (const auto& [key, value] : sorted) {
    Bits kv = key;
    kv.insert(kv.end(), value.begin(), value.end());
    ex.targets.push_back(data_target(kv));
  }
  ex.targets.push_back(end_target(2 * kFieldBits));
  ex.scored.assign(ex.targets.size(), true);
  return ex;
}

// a and b are LSB first.
Example make_add_example(const Bits& a, const Bits& b) {
  require(a.size() == b.size() && !a.empty(), "add operands must have equal positive length");
  Example ex;
  ex.task = TaskId::kAdd;
  ex.length = static_cast<int>(a.size());
  auto bit = [](std::uint8_t x) {
    nn::Vector v = nn::Vector::Zero(3);
    v(0) = x;
    return v;
  };
  for (auto x : a) ex.inputs.push_back(bit(x));
  ex.inputs.push_back(nn::Vector::Unit(3, 1));
  for (auto x : b) ex.inputs.push_back(bit(x));
  ex.inputs.push_back(nn::Vector::Unit(3, 2));
  int carry = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int s = a[i] + b[i] + carry;
    ex.targets.push_back(data_target({static_cast<std::uint8_t>(s & 1)}));
    carry = s >> 1;
  }
  ex.targets.push_back(data_target({static_cast<std::uint8_t>(carry)}));
  ex.targets.push_back(end_target(1));
  ex.scored.assign(ex.targets.size(), true);
  return ex;
}

// ---- oracles (independent reference path) ----

std::vector<Bits> reverse_oracle(const std::vector<Bits>& x) {
  const std::size_t m = x.size();
  std::vector<Bits> y(m);
  for (std::size_t i = 1; i <= m; ++i) y[i - 1] = x[m + 1 - i - 1];
  return y;
}

Bits search_oracle(const std::vector<Pair>& pairs, const Bits& q) {
  for (const auto& [key, value] : pairs) {
    if (key == q) return value;
  }
  throw UsageError("search query not found");
}

std::vector<Bits> merge_oracle(const std::vector<Prioritized>& a,
                               const std::vector<Prioritized>& b) {
  std::vector<Bits> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].level < b[j].level)) {
      out.push_back(a[i++].value);
    } else {
      out.push_back(b[j++].value);
    }
  }
  return out;
}

std::vector<Bits> sort_oracle(std::vector<Pair> pairs) {
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    Pair cur = pairs[i];
    std::size_t j = i;
    while (j > 0 && cur.first < pairs[j - 1].first) {
      pairs[j] = pairs[j - 1];
      --j;
    }
    pairs[j] = cur;
  }
  std::vector<Bits> out;
  for (auto& [key, value] : pairs) {
    Bits kv = key;
    kv.insert(kv.end(), value.begin(), value.end());
    out.push_back(kv);
  }
  return out;
}

// Little-endian 32-bit limbs.
std::vector<std::uint32_t> to_limbs(const Bits& lsb_first) {
  std::vector<std::uint32_t> limbs((lsb_first.size() + 31) / 32, 0);
  for (std::size_t i = 0; i < lsb_first.size(); ++i) {
    if (lsb_first[i]) limbs[i / 32] |= (1u << (i % 32));
  }
  return limbs;
}

Bits add_oracle(const Bits& a, const Bits& b) {
  const auto la = to_limbs(a);
  const auto lb = to_limbs(b);
  std::vector<std::uint32_t> sum(la.size() + 1, 0);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    const std::uint64_t s = std::uint64_t{la[i]} + lb[i] + carry;
    sum[i] = static_cast<std::uint32_t>(s);
    carry = s >> 32;
  }
  sum[la.size()] = static_cast<std::uint32_t>(carry);
  Bits out(a.size() + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (sum[i / 32] >> (i % 32)) & 1u;
  return out;
}

int ds_width(TaskId kind) { return task_shape(kind).input_width; }

// ---- decoders ----

std::vector<Pair> decode_pairs(const std::vector<nn::Vector>& inputs, std::size_t count) {
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < count; ++i) {
    pairs.emplace_back(decode_bits(inputs[i], 0, kFieldBits), decode_bits(inputs[i], kFieldBits, kFieldBits));
  }
  return pairs;
}

std::vector<Prioritized> decode_prioritized(const std::vector<nn::Vector>& inputs, std::size_t from,
                                            std::size_t to) {
  std::vector<Prioritized> out;
  for (std::size_t i = from; i < to; ++i) {
    out.push_back({priority_level(inputs[i](0)), decode_bits(inputs[i], 1, kFieldBits)});
  }
  return out;
}

std::vector<DsOp> decode_ds(TaskId kind, const std::vector<nn::Vector>& inputs) {
  std::vector<DsOp> ops;
  for (const auto& v : inputs) {
    DsOp op;
    if (v(1) > 0.5) {
      op.kind = DsOp::Kind::kPop;
    } else {
      op.payload = decode_bits(v, 2, kFieldBits);
      if (kind == TaskId::kPriorityQueue) op.priority = decode_bits(v, 2 + kFieldBits, kFieldBits);
    }
    ops.push_back(op);
  }
  return ops;
}

}  // namespace

std::string to_string(TaskId task) {
  switch (task) {
    case TaskId::kReverse: return "reverse";
    case TaskId::kSearch: return "search";
    case TaskId::kMerge: return "merge";
    case TaskId::kSort: return "sort";
    case TaskId::kAdd: return "add";
    case TaskId::kStack: return "stack";
    case TaskId::kQueue: return "queue";
    case TaskId::kPriorityQueue: return "pqueue";
  }
  return "?";
}

TaskId parse_task(const std::string& name) {
  static const std::map<std::string, TaskId> kNames = {
      {"reverse", TaskId::kReverse}, {"search", TaskId::kSearch},
      {"merge", TaskId::kMerge},     {"sort", TaskId::kSort},
      {"add", TaskId::kAdd},         {"stack", TaskId::kStack},
      {"queue", TaskId::kQueue},     {"pqueue", TaskId::kPriorityQueue},
      {"priorityqueue", TaskId::kPriorityQueue}};
  auto it = kNames.find(name);
  if (it == kNames.end()) throw ConfigError("unknown task '" + name + "'");
  return it->second;
}

bool is_data_structure(TaskId task) {
  return task == TaskId::kStack || task == TaskId::kQueue || task == TaskId::kPriorityQueue;
}

TaskShape task_shape(TaskId task, int data_bits) {
  switch (task) {
    case TaskId::kReverse:
      require(data_bits >= 1, "reverse needs at least one data bit");
      return {data_bits, data_bits};
    case TaskId::kSearch: return {2 * kFieldBits + 1, kFieldBits};
    case TaskId::kMerge: return {kFieldBits + 1, kFieldBits};
    case TaskId::kSort: return {2 * kFieldBits, 2 * kFieldBits};
    case TaskId::kAdd: return {3, 1};
    case TaskId::kStack:
    case TaskId::kQueue: return {2 + kFieldBits, kFieldBits};
    case TaskId::kPriorityQueue: return {2 + 2 * kFieldBits, kFieldBits};
  }
  return {};
}

Bits data_target(const Bits& data) {
  Bits t = data;
  t.push_back(0);
  return t;
}

Bits end_target(int output_bits) {
  Bits t(static_cast<std::size_t>(output_bits) + 1, 0);
  t.back() = 1;
  return t;
}

bool is_end_target(const Bits& target) { return !target.empty() && target.back() == 1; }

Bits random_bits(int width, Rng& rng) {
  Bits out(static_cast<std::size_t>(width));
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 63);
  return out;
}

std::string bits_to_string(const Bits& bits) {
  std::string s;
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

Bits bits_from_string(const std::string& s) {
  Bits out;
  for (char c : s) {
    require(c == '0' || c == '1', "bad bit string '" + s + "'");
    out.push_back(c == '1' ? 1 : 0);
  }
  return out;
}

std::uint32_t bits_to_uint(const Bits& bits) {
  std::uint32_t v = 0;
  for (auto b : bits) v = (v << 1) | b;
  return v;
}

Bits uint_to_bits(std::uint32_t value, int width) {
  Bits out(static_cast<std::size_t>(width));
  for (int j = width - 1; j >= 0; --j) {
    out[static_cast<std::size_t>(j)] = value & 1u;
    value >>= 1;
  }
  return out;
}

Example gen_reverse(int m, Rng& rng, int data_bits) {
  require(m >= 1, "reverse needs m >= 1");
  std::vector<Bits> symbols;
  for (int i = 0; i < m; ++i) symbols.push_back(random_bits(data_bits, rng));
  return make_reverse_example(symbols, data_bits);
}

Example gen_search(int m, Rng& rng) {
  require(m >= 2, "search needs m >= 2");
  std::vector<Pair> pairs;
  for (int i = 0; i + 1 < m; ++i) pairs.emplace_back(random_bits(kFieldBits, rng), random_bits(kFieldBits, rng));
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.first < b.first; });
  const auto pick = static_cast<std::size_t>(uniform_int(rng, 0, m - 2));
  return make_search_example(pairs, pairs[pick].first);
}

Example gen_merge(int m, int m2, Rng& rng) {
  require(m >= 0 && m2 >= 0 && m + m2 >= 1, "merge needs at least one element");
  require(m + m2 <= kMergePriorityLevels, "too many merge elements for unique priorities");
  // Partial Fisher-Yates over the priority levels gives distinct priorities.
  std::vector<int> levels(kMergePriorityLevels);
  for (int i = 0; i < kMergePriorityLevels; ++i) levels[static_cast<std::size_t>(i)] = i + 1;
  for (int i = 0; i < m + m2; ++i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, i, kMergePriorityLevels - 1));
    std::swap(levels[static_cast<std::size_t>(i)], levels[j]);
  }
  std::vector<Prioritized> first, second;
  for (int i = 0; i < m + m2; ++i) {
    Prioritized e{levels[static_cast<std::size_t>(i)], random_bits(kFieldBits, rng)};
    (i < m ? first : second).push_back(e);
  }
  auto by_level = [](const Prioritized& a, const Prioritized& b) { return a.level < b.level; };
  std::sort(first.begin(), first.end(), by_level);
  std::sort(second.begin(), second.end(), by_level);
  return make_merge_example(first, second);
}

Example gen_sort(int m, Rng& rng) {
  require(m >= 1, "sort needs m >= 1");
  std::vector<Pair> pairs;
  for (int i = 0; i < m; ++i) pairs.emplace_back(random_bits(kFieldBits, rng), random_bits(kFieldBits, rng));
  return make_sort_example(pairs);
}

Example gen_add(int m, Rng& rng) {
  require(m >= 1, "add needs m >= 1");
  const Bits a = random_bits(m, rng);
  const Bits b = random_bits(m, rng);
  return make_add_example(a, b);
}

std::vector<DsOp> gen_ds_sequence(TaskId kind, int n_ops, Rng& rng) {
  require(is_data_structure(kind), "not a data-structure task: " + to_string(kind));
  require(n_ops >= 1, "need at least one operation");
  std::vector<DsOp> ops;
  std::size_t held = 0;
  std::set<std::uint32_t> used_priorities;
  std::multiset<std::uint32_t> live_priorities;
  // Live priorities are tracked by replaying POPs on a max-ordered set.
  for (int t = 1; t <= n_ops; ++t) {
    const bool pop = bernoulli(rng, static_cast<double>(t) / n_ops) && held > 0;
    DsOp op;
    if (pop) {
      op.kind = DsOp::Kind::kPop;
      --held;
      if (kind == TaskId::kPriorityQueue) live_priorities.erase(std::prev(live_priorities.end()));
    } else {
      op.kind = DsOp::Kind::kPush;
      op.payload = random_bits(kFieldBits, rng);
      if (kind == TaskId::kPriorityQueue) {
        std::vector<std::uint32_t> candidates;
        for (std::uint32_t p = 0; p < (1u << kFieldBits); ++p) {
          if (!used_priorities.count(p)) candidates.push_back(p);
        }
        if (candidates.empty()) {
          for (std::uint32_t p = 0; p < (1u << kFieldBits); ++p) {
            if (!live_priorities.count(p)) candidates.push_back(p);
          }
        }
        const auto p = candidates[static_cast<std::size_t>(
            uniform_int(rng, 0, static_cast<std::int64_t>(candidates.size()) - 1))];
        used_priorities.insert(p);
        live_priorities.insert(p);
        op.priority = uint_to_bits(p, kFieldBits);
      }
      ++held;
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

std::vector<Bits> ds_oracle(TaskId kind, const std::vector<DsOp>& ops) {
  require(is_data_structure(kind), "not a data-structure task: " + to_string(kind));
  struct Item {
    Bits value;
    Bits priority;
  };
  std::vector<Item> items;  // insertion order
  std::vector<Bits> out;
  for (const DsOp& op : ops) {
    if (op.kind == DsOp::Kind::kPush) {
      items.push_back({op.payload, op.priority.value_or(Bits{})});
      continue;
    }
    if (items.empty()) throw UsageError("POP on an empty " + to_string(kind));
    std::size_t pick = 0;
    if (kind == TaskId::kStack) {
      pick = items.size() - 1;
    } else if (kind == TaskId::kQueue) {
      pick = 0;
    } else {
      for (std::size_t i = 1; i < items.size(); ++i) {
        if (items[pick].priority < items[i].priority) pick = i;
      }
    }
    out.push_back(items[pick].value);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

Example make_ds_example(TaskId kind, const std::vector<DsOp>& ops) {
  require(is_data_structure(kind), "not a data-structure task: " + to_string(kind));
  Example ex;
  ex.task = kind;
  ex.length = static_cast<int>(ops.size());
  const int width = ds_width(kind);
  std::stack<Bits> stack;
  std::queue<Bits> queue;
  std::priority_queue<std::pair<Bits, Bits>> heap;  // (priority, value)
  for (const DsOp& op : ops) {
    nn::Vector v = nn::Vector::Zero(width);
    if (op.kind == DsOp::Kind::kPush) {
      v(0) = 1.0;
      v = encode_bits(op.payload, width, 2, v);
      switch (kind) {
        case TaskId::kStack: stack.push(op.payload); break;
        case TaskId::kQueue: queue.push(op.payload); break;
        default:
          require(op.priority.has_value(), "priority queue PUSH without priority");
          v = encode_bits(*op.priority, width, 2 + kFieldBits, v);
          heap.emplace(*op.priority, op.payload);
      }
      ex.targets.push_back(Bits(kFieldBits, 0));
      ex.scored.push_back(false);
    } else {
      v(1) = 1.0;
      Bits top;
      switch (kind) {
        case TaskId::kStack:
          require(!stack.empty(), "POP on an empty stack");
          top = stack.top();
          stack.pop();
          break;
        case TaskId::kQueue:
          require(!queue.empty(), "POP on an empty queue");
          top = queue.front();
          queue.pop();
          break;
        default:
          require(!heap.empty(), "POP on an empty priority queue");
          top = heap.top().second;
          heap.pop();
      }
      ex.targets.push_back(top);
      ex.scored.push_back(true);
    }
    ex.inputs.push_back(v);
  }
  return ex;
}

Example gen_ds(TaskId kind, int n_ops, Rng& rng) {
  return make_ds_example(kind, gen_ds_sequence(kind, n_ops, rng));
}

int min_length(TaskId task) {
  switch (task) {
    case TaskId::kSearch: return 2;
    case TaskId::kAdd: return 4;
    default: return 1;
  }
}

Example sample_example(TaskId task, int lo, int hi, Rng& rng, int data_bits) {
  lo = std::max(lo, min_length(task));
  require(hi >= lo, "length range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        "] is empty for task " + to_string(task));
  const int length = static_cast<int>(uniform_int(rng, lo, hi));
  switch (task) {
    case TaskId::kReverse: return gen_reverse(length, rng, data_bits);
    case TaskId::kSearch: return gen_search(length, rng);
    case TaskId::kMerge: {
      const int m = static_cast<int>(uniform_int(rng, 0, length));
      return gen_merge(m, length - m, rng);
    }
    case TaskId::kSort: return gen_sort(length, rng);
    case TaskId::kAdd: return gen_add((length - 2) / 2, rng);
    default: return gen_ds(task, length, rng);
  }
}

std::vector<Bits> oracle_targets(const Example& ex) {
  std::vector<Bits> out;
  auto finish = [&](const std::vector<Bits>& data, int bits) {
    for (const Bits& d : data) out.push_back(data_target(d));
    out.push_back(end_target(bits));
    return out;
  };
  switch (ex.task) {
    case TaskId::kReverse: {
      std::vector<Bits> x;
      for (const auto& v : ex.inputs) x.push_back(decode_bits(v, 0, ex.data_bits));
      return finish(reverse_oracle(x), ex.data_bits);
    }
    case TaskId::kSearch: {
      require(!ex.inputs.empty(), "empty search example");
      const auto pairs = decode_pairs(ex.inputs, ex.inputs.size() - 1);
      return finish({search_oracle(pairs, decode_bits(ex.inputs.back(), 0, kFieldBits))}, kFieldBits);
    }
    case TaskId::kMerge: {
      const auto n1 = static_cast<std::size_t>(ex.length);
      return finish(merge_oracle(decode_prioritized(ex.inputs, 0, n1),
                                 decode_prioritized(ex.inputs, n1, ex.inputs.size())),
                    kFieldBits);
    }
    case TaskId::kSort:
      return finish(sort_oracle(decode_pairs(ex.inputs, ex.inputs.size())), 2 * kFieldBits);
    case TaskId::kAdd: {
      const auto m = static_cast<std::size_t>(ex.length);
      Bits a, b;
      for (std::size_t i = 0; i < m; ++i) a.push_back(ex.inputs[i](0) > 0.5);
      for (std::size_t i = 0; i < m; ++i) b.push_back(ex.inputs[m + 1 + i](0) > 0.5);
      std::vector<Bits> data;
      for (auto bit : add_oracle(a, b)) data.push_back({bit});
      return finish(data, 1);
    }
    default: {
      const auto ops = decode_ds(ex.task, ex.inputs);
      const auto pops = ds_oracle(ex.task, ops);
      std::size_t k = 0;
      for (const DsOp& op : ops) {
        out.push_back(op.kind == DsOp::Kind::kPop ? pops[k++] : Bits(kFieldBits, 0));
      }
      return out;
    }
  }
}

std::string dataset_header() { return "# task\tlength\tinputs\ttargets"; }

std::string format_example(const Example& ex) {
  std::ostringstream line;
  line << to_string(ex.task) << '\t' << ex.length;
  if (ex.task == TaskId::kMerge) line << ',' << ex.length2;
  line << '\t';
  for (std::size_t i = 0; i < ex.inputs.size(); ++i) {
    const nn::Vector& v = ex.inputs[i];
    if (i > 0) line << ' ';
    switch (ex.task) {
      case TaskId::kReverse: line << bits_to_string(decode_bits(v, 0, ex.data_bits)); break;
      case TaskId::kSearch:
        if (i + 1 == ex.inputs.size()) {
          line << '?' << bits_to_string(decode_bits(v, 0, kFieldBits));
        } else {
          line << bits_to_string(decode_bits(v, 0, kFieldBits)) << ':'
               << bits_to_string(decode_bits(v, kFieldBits, kFieldBits));
        }
        break;
      case TaskId::kMerge:
        line << format_priority(v(0)) << ':' << bits_to_string(decode_bits(v, 1, kFieldBits));
        break;
      case TaskId::kSort:
        line << bits_to_string(decode_bits(v, 0, kFieldBits)) << ':'
             << bits_to_string(decode_bits(v, kFieldBits, kFieldBits));
        break;
      case TaskId::kAdd:
        line << (v(1) > 0.5 ? "+" : v(2) > 0.5 ? "=" : (v(0) > 0.5 ? "1" : "0"));
        break;
      default:
        if (v(1) > 0.5) {
          line << "POP";
        } else {
          line << "PUSH:" << bits_to_string(decode_bits(v, 2, kFieldBits));
          if (ex.task == TaskId::kPriorityQueue) {
            line << ':' << bits_to_string(decode_bits(v, 2 + kFieldBits, kFieldBits));
          }
        }
    }
  }
  line << '\t';
  for (std::size_t i = 0; i < ex.targets.size(); ++i) {
    if (i > 0) line << ' ';
    const Bits& t = ex.targets[i];
    if (is_data_structure(ex.task)) {
      line << (ex.scored[i] ? bits_to_string(t) : "-");
    } else if (is_end_target(t)) {
      line << '$';
    } else {
      line << bits_to_string(Bits(t.begin(), t.end() - 1));
    }
  }
  return line.str();
}

Example parse_example(const std::string& line) {
  const auto fields = split(line, '\t');
  require(fields.size() == 4, "dataset line must have 4 tab-separated fields");
  const TaskId task = parse_task(fields[0]);
  const auto tokens = split(fields[2], ' ');
  Example ex;
  switch (task) {
    case TaskId::kReverse: {
      std::vector<Bits> symbols;
      for (const auto& t : tokens) symbols.push_back(bits_from_string(t));
      require(!symbols.empty(), "reverse example without inputs");
      ex = make_reverse_example(symbols, static_cast<int>(symbols.front().size()));
      break;
    }
    case TaskId::kSearch: {
      require(!tokens.empty() && tokens.back().starts_with("?"), "search example needs a ?query");
      std::vector<Pair> pairs;
      for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        const auto kv = split(tokens[i], ':');
        require(kv.size() == 2, "bad search pair '" + tokens[i] + "'");
        pairs.emplace_back(bits_from_string(kv[0]), bits_from_string(kv[1]));
      }
      ex = make_search_example(pairs, bits_from_string(tokens.back().substr(1)));
      break;
    }
    case TaskId::kMerge: {
      const auto lens = split(fields[1], ',');
      require(lens.size() == 2, "merge length field must be 'm,m2'");
      const auto m = static_cast<std::size_t>(std::stoi(lens[0]));
      std::vector<Prioritized> first, second;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto pv = split(tokens[i], ':');
        require(pv.size() == 2, "bad merge element '" + tokens[i] + "'");
        Prioritized e{priority_level(std::stod(pv[0])), bits_from_string(pv[1])};
        (i < m ? first : second).push_back(e);
      }
      ex = make_merge_example(first, second);
      break;
    }
    case TaskId::kSort: {
      std::vector<Pair> pairs;
      for (const auto& t : tokens) {
        const auto kv = split(t, ':');
        require(kv.size() == 2, "bad sort pair '" + t + "'");
        pairs.emplace_back(bits_from_string(kv[0]), bits_from_string(kv[1]));
      }
      ex = make_sort_example(pairs);
      break;
    }
    case TaskId::kAdd: {
      Bits a, b;
      Bits* cur = &a;
      for (const auto& t : tokens) {
        if (t == "+") {
          cur = &b;
        } else if (t != "=") {
          cur->push_back(bits_from_string(t).at(0));
        }
      }
      ex = make_add_example(a, b);
      break;
    }
    default: {
      std::vector<DsOp> ops;
      for (const auto& t : tokens) {
        DsOp op;
        if (t == "POP") {
          op.kind = DsOp::Kind::kPop;
        } else {
          const auto parts = split(t, ':');
          require(parts.size() >= 2 && parts[0] == "PUSH", "bad operation '" + t + "'");
          op.payload = bits_from_string(parts[1]);
          if (parts.size() == 3) op.priority = bits_from_string(parts[2]);
        }
        ops.push_back(op);
      }
      ex = make_ds_example(task, ops);
    }
  }
  // Stored targets must agree with the ones rebuilt from the inputs.
  std::vector<std::string> stored = split(fields[3], ' ');
  std::istringstream rebuilt(format_example(ex));
  std::string ignored, rebuilt_targets;
  for (int i = 0; i < 3; ++i) std::getline(rebuilt, ignored, '\t');
  std::getline(rebuilt, rebuilt_targets);
  require(stored == split(rebuilt_targets, ' '), "targets do not match inputs: " + line);
  return ex;
}

}  // namespace ham::tasks
