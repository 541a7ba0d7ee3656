#pragma once

#include "ham/nn/types.hpp"
#include "ham/random.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ham::nn {

/// A trainable tensor and its gradient accumulator (always the same shape).
struct Parameter {
  Matrix value;
  Matrix grad;
};

/// All trainable weights of a model, keyed by a stable slash-separated path
/// such as "ham/search/layer0/weight". Entries are never moved once created,
/// so `Parameter*` handles stay valid for the lifetime of the store.
class ParameterStore {
 public:
  using Map = std::map<std::string, Parameter>;

  ParameterStore() = default;
  explicit ParameterStore(std::uint64_t seed) : rng_seed_(seed) {}

  /// Registers a zero-filled parameter; throws UsageError on a duplicate name.
  Parameter& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  void zero_grad();
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::vector<std::string> names() const;

  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

  std::uint64_t rng_seed() const { return rng_seed_; }
  void set_rng_seed(std::uint64_t seed) { rng_seed_ = seed; }

  /// Copies values only (not gradients) from a store with identical names and
  /// shapes; throws ConfigError otherwise.
  void assign_values(const ParameterStore& other);

 private:
  Map params_;
  std::uint64_t rng_seed_ = 0;
};

/// Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)), drawn row-major.
void glorot_uniform(Matrix& weight, Rng& rng);

/// Global L2 norm of every gradient in the store.
Scalar grad_norm(const ParameterStore& store);

/// Rescales all gradients by c/g when their global norm g exceeds c.
/// Returns the norm measured before clipping.
Scalar clip_global_norm(ParameterStore& store, Scalar c);

}  // namespace ham::nn
