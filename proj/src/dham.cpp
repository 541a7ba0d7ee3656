#include "ham/dham.hpp"

namespace ham {

LeafDistribution leaf_distribution(TreeMemory& mem, const HamNetworks& nets, nn::Var query) {
  if (query.size() != nets.spec().query_width) throw DimensionError("query width mismatch");
  const int n = mem.leaf_count();
  nn::Tape& tape = mem.tape();
  // reach[e] = probability that the descent passes through node e.
  std::vector<nn::Var> reach(static_cast<std::size_t>(2 * n));
  reach[1] = tape.constant(1.0);
  for (int e = 1; e < n; ++e) {
    ++mem.counters().search;
    const nn::Var right = nets.search(nn::concat(mem.node(e), query));
    const auto ue = static_cast<std::size_t>(e);
    reach[2 * ue] = reach[ue] * (1.0 - right);
    reach[2 * ue + 1] = reach[ue] * right;
  }
  LeafDistribution dist;
  dist.probs.reserve(static_cast<std::size_t>(n));
  dist.prob_vars.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const nn::Var p = reach[static_cast<std::size_t>(n + i)];
    dist.prob_vars.push_back(p);
    dist.probs.push_back(p.scalar());
  }
  return dist;
}

LeafDistribution constant_distribution(nn::Tape& tape, const std::vector<double>& probs) {
  LeafDistribution dist;
  dist.probs = probs;
  for (double p : probs) dist.prob_vars.push_back(tape.constant(p));
  return dist;
}

nn::Var soft_read(const TreeMemory& mem, const LeafDistribution& dist) {
  const int n = mem.leaf_count();
  if (static_cast<int>(dist.prob_vars.size()) != n) {
    throw DimensionError("distribution has " + std::to_string(dist.prob_vars.size()) +
                         " entries for " + std::to_string(n) + " leaves");
  }
  nn::Var total = nn::scale(mem.leaf(0), dist.prob_vars[0]);
  for (int i = 1; i < n; ++i) {
    total = total + nn::scale(mem.leaf(i), dist.prob_vars[static_cast<std::size_t>(i)]);
  }
  return total;
}

void soft_write(TreeMemory& mem, const HamNetworks& nets, const LeafDistribution& dist,
                nn::Var query) {
  const int n = mem.leaf_count();
  if (static_cast<int>(dist.prob_vars.size()) != n) {
    throw DimensionError("distribution does not match the leaf count");
  }
  for (int i = 0; i < n; ++i) {
    ++mem.counters().write;
    const nn::Var old = mem.leaf(i);
    const nn::Var written = nets.write(old, query);
    mem.set_node(n + i, old + nn::scale(written - old, dist.prob_vars[static_cast<std::size_t>(i)]));
  }
  soft_refresh(mem, nets);
}

void soft_refresh(TreeMemory& mem, const HamNetworks& nets) {
  for (int e = mem.leaf_count() - 1; e >= 1; --e) mem.set_node(e, join_children(mem, nets, e));
}

}  // namespace ham
