#include "ham/memory.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace ham;
using nn::Tape;
using nn::Var;
using nn::Vector;

namespace {

struct Ham {
  nn::ParameterStore store;
  HamNetworks nets;
  Ham(const HamSpec& spec, std::uint64_t seed, double jitter = 0.2) {
    Rng rng(seed);
    nets = HamNetworks::create(store, "ham", spec, rng);
    test::jitter(store, rng, jitter);
  }
  Ham(const Ham&) = delete;

  nn::Parameter& last_bias(const nn::Mlp& m) { return m.bias(m.layer_count() - 1); }
  nn::Parameter& last_weight(const nn::Mlp& m) { return m.weight(m.layer_count() - 1); }
};

HamSpec small_spec() { return {3, 4, 2, 5, 1}; }

std::vector<Vector> random_inputs(int m, Eigen::Index width, Rng& rng) {
  std::vector<Vector> xs;
  for (int i = 0; i < m; ++i) xs.push_back(test::random_vector(width, rng, 0, 1));
  return xs;
}

int leaf_from_decisions(const std::vector<bool>& decisions) {
  int e = 1;
  for (bool right : decisions) e = 2 * e + (right ? 1 : 0);
  return e;
}

}  // namespace

TEST(InitMemory, SingleLeafHoldsEmbedding) {
  Ham h(small_spec(), 1);
  Rng rng(1);
  Tape tape;
  const auto xs = random_inputs(1, 3, rng);
  TreeMemory mem = init_memory(tape, h.nets, xs, 1);
  EXPECT_EQ(mem.node_count(), 1);
  EXPECT_EQ(mem.counters().join, 0);
  EXPECT_EQ(mem.leaf(0).value(), h.nets.embed(tape.constant(xs[0])).value());
}

TEST(InitMemory, ExcessLeavesAreZero) {
  Ham h(small_spec(), 2);
  Rng rng(2);
  Tape tape;
  const auto xs = random_inputs(2, 3, rng);
  TreeMemory mem = init_memory(tape, h.nets, xs, 4);
  EXPECT_EQ(mem.leaf(2).value(), Vector::Zero(4));
  EXPECT_EQ(mem.leaf(3).value(), Vector::Zero(4));
  EXPECT_EQ(mem.leaf(1).value(), h.nets.embed(tape.constant(xs[1])).value());
  EXPECT_EQ(mem.counters().join, 3);
  EXPECT_EQ(mem.counters().embed, 2);
}

TEST(InitMemory, InnerNodesAreJoinOfChildren) {
  for (int m = 0; m <= 8; ++m) {
    Ham h(small_spec(), 3 + static_cast<std::uint64_t>(m));
    Rng rng(3);
    Tape tape;
    TreeMemory mem = init_memory(tape, h.nets, random_inputs(m, 3, rng), 8);
    EXPECT_EQ(mem.node_count(), 15);
    for (int e = 1; e < 8; ++e) {
      const Vector recomputed = h.nets.join(nn::concat(mem.node(2 * e), mem.node(2 * e + 1))).value();
      EXPECT_EQ(recomputed, mem.node(e).value()) << "m=" << m << " node " << e;
    }
  }
}

TEST(InitMemory, RejectsOverflowAndBadCapacity) {
  Ham h(small_spec(), 4);
  Rng rng(4);
  Tape tape;
  EXPECT_THROW(init_memory(tape, h.nets, random_inputs(5, 3, rng), 4), CapacityError);
  EXPECT_THROW(init_memory(tape, h.nets, random_inputs(2, 3, rng), 6), ConfigError);
}

TEST(Attend, SaturatedLowSearchGoesLeftmost) {
  Ham h(small_spec(), 5);
  h.last_bias(h.nets.search).value.setConstant(-1e3);
  Rng rng(5);
  for (int n : {2, 8, 32}) {
    Tape tape;
    TreeMemory mem = init_memory(tape, h.nets, random_inputs(n / 2, 3, rng), n);
    const AttentionTrace t = attend(mem, h.nets, tape.constant(test::random_vector(2, rng)), GreedyMode{});
    EXPECT_EQ(t.attended_leaf, n);
    EXPECT_EQ(t.leaf_ordinal(n), 0);
  }
}

TEST(Attend, ExactHalfTiesGoLeft) {
  Ham h(small_spec(), 6);
  h.last_weight(h.nets.search).value.setZero();
  h.last_bias(h.nets.search).value.setZero();
  Rng rng(6);
  Tape tape;
  TreeMemory mem = init_memory(tape, h.nets, random_inputs(3, 3, rng), 4);
  const AttentionTrace t = attend(mem, h.nets, tape.constant(test::random_vector(2, rng)), GreedyMode{});
  EXPECT_EQ(t.attended_leaf, 4);
  for (double p : t.probabilities) EXPECT_EQ(p, 0.5);
}

TEST(Attend, ForcedRightLeftReachesThirdLeaf) {
  Ham h(small_spec(), 7);
  Rng rng(7);
  Tape tape;
  TreeMemory mem = init_memory(tape, h.nets, random_inputs(4, 3, rng), 4);
  const Var q = tape.constant(test::random_vector(2, rng));
  const AttentionTrace t = attend(mem, h.nets, q, ForcedMode{{true, false}});
  EXPECT_EQ(t.attended_leaf, 6);
  EXPECT_EQ(t.leaf_ordinal(4), 2);
  EXPECT_EQ(t.decision_string(), "RL");
  EXPECT_EQ(t.path, (std::vector<int>{1, 3}));
  ASSERT_EQ(t.probabilities.size(), 2u);
  EXPECT_THROW(attend(mem, h.nets, q, ForcedMode{{true}}), UsageError);
  EXPECT_THROW(attend(mem, h.nets, q, ForcedMode{{true, false, true}}), UsageError);
}

TEST(Attend, TraceInvariants) {
  Ham h(small_spec(), 8, 2.0);
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 << (1 + trial % 6);
    Tape tape;
    TreeMemory mem = init_memory(tape, h.nets, random_inputs(n, 3, rng), n);
    const AttentionTrace t = attend(mem, h.nets, tape.constant(test::random_vector(2, rng)), SampleMode{&rng});
    ASSERT_EQ(static_cast<int>(t.decisions.size()), mem.depth());
    EXPECT_EQ(leaf_from_decisions(t.decisions), t.attended_leaf);
    EXPECT_GE(t.attended_leaf, n);
    EXPECT_LE(t.attended_leaf, 2 * n - 1);
    EXPECT_LE(t.log_prob, 0.0);
    double expected = 0;
    double from_tape = 0;
    for (std::size_t k = 0; k < t.decisions.size(); ++k) {
      const double p = std::clamp(t.probabilities[k], kProbabilityFloor, 1 - kProbabilityFloor);
      expected += std::log(t.decisions[k] ? p : 1 - p);
      from_tape += decision_log_prob(t, k).scalar();
      EXPECT_GT(t.probabilities[k], 0.0);
      EXPECT_LT(t.probabilities[k], 1.0);
    }
    EXPECT_NEAR(t.log_prob, expected, 1e-12);
    EXPECT_NEAR(from_tape, expected, 1e-12);
  }
}

TEST(Attend, UniformSearchSamplesUniformLeaves) {
  Ham h(small_spec(), 9);
  h.last_weight(h.nets.search).value.setZero();
  h.last_bias(h.nets.search).value.setZero();
  Rng rng(9);
  const int n = 8, draws = 40000;
  std::vector<int> counts(n, 0);
  Tape tape;
  const auto xs = random_inputs(n, 3, rng);
  const Vector q = test::random_vector(2, rng);
  for (int chunk = 0; chunk < draws / 5000; ++chunk) {
    tape.clear();
    TreeMemory mem = init_memory(tape, h.nets, xs, n);
    const Var qv = tape.constant(q);
    for (int i = 0; i < 5000; ++i) ++counts[static_cast<std::size_t>(attend(mem, h.nets, qv, SampleMode{&rng}).leaf_ordinal(n))];
  }
  const double expected = static_cast<double>(draws) / n;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 18.475);  // 99% quantile, 7 degrees of freedom
}

TEST(Attend, SampledLeavesFollowPathProducts) {
  Ham h(small_spec(), 10, 3.0);
  Rng rng(10);
  const int n = 8, draws = 100000;
  const auto xs = random_inputs(n, 3, rng);
  const Vector q = test::random_vector(2, rng);
  Tape tape;

  // Oracle: product of the chosen-direction probabilities along each forced path.
  std::vector<double> exact(n);
  {
    TreeMemory mem = init_memory(tape, h.nets, xs, n);
    for (int leaf = 0; leaf < n; ++leaf) {
      std::vector<bool> d;
      for (int level = 2; level >= 0; --level) d.push_back(((leaf >> level) & 1) != 0);
      const AttentionTrace t = attend(mem, h.nets, tape.constant(q), ForcedMode{d});
      double p = 1;
      for (std::size_t k = 0; k < d.size(); ++k) p *= d[k] ? t.probabilities[k] : 1 - t.probabilities[k];
      exact[static_cast<std::size_t>(leaf)] = p;
    }
  }
  std::vector<double> freq(n, 0);
  for (int chunk = 0; chunk < draws / 10000; ++chunk) {
    tape.clear();
    TreeMemory mem = init_memory(tape, h.nets, xs, n);
    const Var qv = tape.constant(q);
    for (int i = 0; i < 10000; ++i) freq[static_cast<std::size_t>(attend(mem, h.nets, qv, SampleMode{&rng}).leaf_ordinal(n))] += 1.0 / draws;
  }
  double tv = 0;
  for (int i = 0; i < n; ++i) tv += 0.5 * std::abs(freq[static_cast<std::size_t>(i)] - exact[static_cast<std::size_t>(i)]);
  EXPECT_LT(tv, 0.02);
  double total = 0;
  for (double p : exact) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Attend, ProbabilitiesAreClampedForLogs) {
  Ham h(small_spec(), 11);
  h.last_bias(h.nets.search).value.setConstant(1e3);
  Rng rng(11);
  Tape tape;
  TreeMemory mem = init_memory(tape, h.nets, random_inputs(2, 3, rng), 2);
  const Var q = tape.constant(test::random_vector(2, rng));
  const AttentionTrace t = attend(mem, h.nets, q, ForcedMode{{false}});
  EXPECT_TRUE(std::isfinite(t.log_prob));
  EXPECT_NEAR(t.log_prob, std::log(kProbabilityFloor), 1e-9);
}

TEST(WriteUpdate, ClosedGateKeepsMemoryBitwise) {
  Ham h(small_spec(), 12);
  h.last_bias(h.nets.write_t).value.setConstant(-1e3);
  Rng rng(12);
  Tape tape;
  TreeMemory mem = init_memory(tape, h.nets, random_inputs(6, 3, rng), 8);
  const auto before = mem.snapshot();
  const Var q = tape.constant(test::random_vector(2, rng));
  const AttentionTrace t = attend(mem, h.nets, q, SampleMode{&rng});
  write_update(mem, h.nets, t, q);
  const auto after = mem.snapshot();
  for (int e = 1; e < 16; ++e) EXPECT_EQ(before[static_cast<std::size_t>(e)], after[static_cast<std::size_t>(e)]) << e;
}

TEST(WriteUpdate, OpenGateWritesCandidate) {
  Ham h(small_spec(), 13);
  h.last_bias(h.nets.write_t).value.setConstant(1e3);
  Rng rng(13);
  Tape tape;
  TreeMemory mem = init_memory(tape, h.nets, random_inputs(4, 3, rng), 4);
  const Var q = tape.constant(test::random_vector(2, rng));
  const AttentionTrace t = attend(mem, h.nets, q, ForcedMode{{false, true}});
  const Vector candidate = h.nets.write_h(nn::concat(mem.node(t.attended_leaf), q)).value();
  write_update(mem, h.nets, t, q);
  EXPECT_EQ(mem.node(5).value(), candidate);
}

TEST(WriteUpdate, HighwayMixMatchesFormula) {
  Ham h(small_spec(), 14);
  Rng rng(14);
  Tape tape;
  TreeMemory mem = init_memory(tape, h.nets, random_inputs(4, 3, rng), 4);
  const Var q = tape.constant(test::random_vector(2, rng));
  const AttentionTrace t = attend(mem, h.nets, q, ForcedMode{{true, true}});
  const Vector old = mem.node(7).value();
  const Var in = nn::concat(mem.node(7), q);
  const Vector gate = h.nets.write_t(in).value();
  const Vector cand = h.nets.write_h(in).value();
  write_update(mem, h.nets, t, q);
  for (Eigen::Index j = 0; j < old.size(); ++j) {
    EXPECT_NEAR(mem.node(7).value()(j), gate(j) * cand(j) + (1 - gate(j)) * old(j), 1e-15);
  }
}

TEST(WriteUpdate, OffPathNodesUnchanged) {
  Ham h(small_spec(), 15, 1.0);
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    Tape tape;
    TreeMemory mem = init_memory(tape, h.nets, random_inputs(8, 3, rng), 8);
    const auto before = mem.snapshot();
    const Var q = tape.constant(test::random_vector(2, rng));
    const AttentionTrace t = attend(mem, h.nets, q, SampleMode{&rng});
    write_update(mem, h.nets, t, q);
    std::set<int> on_path;
    for (int e = t.attended_leaf; e >= 1; e /= 2) on_path.insert(e);
    const auto after = mem.snapshot();
    for (int e = 1; e < 16; ++e) {
      if (!on_path.count(e)) EXPECT_EQ(before[static_cast<std::size_t>(e)], after[static_cast<std::size_t>(e)]) << e;
    }
  }
}

TEST(WriteUpdate, HeapConsistencyAfterManyWrites) {
  Ham h(small_spec(), 16, 1.0);
  Rng rng(16);
  Tape tape;
  TreeMemory mem = init_memory(tape, h.nets, random_inputs(5, 3, rng), 16);
  for (int k = 0; k < 25; ++k) {
    const Var q = tape.constant(test::random_vector(2, rng));
    write_update(mem, h.nets, attend(mem, h.nets, q, SampleMode{&rng}), q);
  }
  for (int e = 1; e < 16; ++e) {
    EXPECT_EQ(h.nets.join(nn::concat(mem.node(2 * e), mem.node(2 * e + 1))).value(), mem.node(e).value()) << e;
  }
}

TEST(AccessCounters, LogarithmicPerAccess) {
  Ham h(HamSpec{2, 3, 2, 4, 1}, 17);
  Rng rng(17);
  for (int k = 1; k <= 8; ++k) {
    const int n = 1 << k;
    Tape tape;
    TreeMemory mem = init_memory(tape, h.nets, random_inputs(n / 2, 2, rng), n);
    EXPECT_EQ(mem.counters().join, n - 1);
    const AccessCounters init = mem.counters();
    const Var q = tape.constant(test::random_vector(2, rng));
    const AttentionTrace t = attend(mem, h.nets, q, SampleMode{&rng});
    EXPECT_EQ(mem.counters().search - init.search, k);
    write_update(mem, h.nets, t, q);
    EXPECT_EQ(mem.counters().search - init.search, k) << n;
    EXPECT_EQ(mem.counters().join - init.join, k) << n;
    EXPECT_EQ(mem.counters().write - init.write, 1);
  }
}

TEST(ReadLeaf, ReturnsEmbeddingOrZero) {
  Ham h(small_spec(), 18);
  Rng rng(18);
  Tape tape;
  const auto xs = random_inputs(3, 3, rng);
  TreeMemory mem = init_memory(tape, h.nets, xs, 4);
  const Var q = tape.constant(test::random_vector(2, rng));
  const AttentionTrace to_second = attend(mem, h.nets, q, ForcedMode{{false, true}});
  EXPECT_EQ(read_leaf(mem, to_second).value(), h.nets.embed(tape.constant(xs[1])).value());
  EXPECT_EQ(read_leaf(mem, to_second).value(), read_leaf(mem, to_second).value());
  const AttentionTrace to_excess = attend(mem, h.nets, q, ForcedMode{{true, true}});
  EXPECT_EQ(read_leaf(mem, to_excess).value(), Vector::Zero(4));
}

TEST(TreeMemory, GradientsFlowThroughWrites) {
  Ham h(small_spec(), 19, 0.5);
  Rng rng(19);
  const auto xs = random_inputs(4, 3, rng);
  const Vector q = test::random_vector(2, rng);
  const auto result = test::finite_difference_check(h.store, [&](Tape& tape) {
    TreeMemory mem = init_memory(tape, h.nets, xs, 4);
    const Var qv = tape.constant(q);
    const AttentionTrace t = attend(mem, h.nets, qv, ForcedMode{{true, false}});
    write_update(mem, h.nets, t, qv);
    const AttentionTrace t2 = attend(mem, h.nets, qv, ForcedMode{{false, true}});
    return nn::sum(nn::square(mem.node(1))) + decision_log_prob(t2, 0) + decision_log_prob(t2, 1);
  });
  EXPECT_LE(result.worst_tensor, 1e-5) << result.worst_name;
  EXPECT_LE(result.worst_element, 1e-5);
}
