#pragma once

#include "ham/memory.hpp"

#include <vector>

namespace ham {

/// Probability that the stochastic descent would end at each leaf.
struct LeafDistribution {
  std::vector<double> probs;           // leaf ordinal -> p(e)
  std::vector<nn::Var> prob_vars;      // same values as length-one tape nodes
};

/// One SEARCH per inner node (n-1 in total); each leaf gets the product of the
/// chosen-direction probabilities along its root path.
LeafDistribution leaf_distribution(TreeMemory& mem, const HamNetworks& nets, nn::Var query);

/// A fixed (non-differentiable) distribution, for probing the soft operations.
LeafDistribution constant_distribution(nn::Tape& tape, const std::vector<double>& probs);

/// sum_e p(e) * h_e over the leaves.
nn::Var soft_read(const TreeMemory& mem, const LeafDistribution& dist);

/// h_e := h_e + p(e) * (WRITE(h_e, query) - h_e) for every leaf, then
/// soft_refresh. WRITE is the same highway map as the hard model.
void soft_write(TreeMemory& mem, const HamNetworks& nets, const LeafDistribution& dist,
                nn::Var query);

/// Recomputes all n-1 inner nodes bottom-up.
void soft_refresh(TreeMemory& mem, const HamNetworks& nets);

}  // namespace ham
