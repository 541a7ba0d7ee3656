#pragma once

#include "ham/nn/parameters.hpp"
#include "ham/nn/types.hpp"

#include <cstdint>
#include <deque>
#include <vector>

namespace ham::nn {

class Tape;

/// Handle to a vector-valued node recorded on a Tape. Scalars are vectors of
/// length one. Cheap to copy; only valid while its tape is not cleared.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::int32_t id) : tape_(tape), id_(id) {}

  const Vector& value() const;
  const Vector& grad() const;
  Eigen::Index size() const { return value().size(); }
  Scalar scalar() const;

  Tape* tape() const { return tape_; }
  std::int32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
};

/// Reverse-mode recorder. Nodes are appended in evaluation order, which is a
/// topological order, so backward is a single reverse sweep. Parameter
/// gradients are accumulated directly into the owning ParameterStore.
///
/// clear() keeps node storage so that repeated episodes of the same shape do
/// not reallocate.
class Tape {
 public:
  enum class Op : std::uint8_t {
    kConstant,
    kVariable,
    kAffine,
    kConcat,
    kSlice,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAffineConst,
    kSigmoid,
    kTanh,
    kRelu,
    kLog,
    kReciprocal,
    kSquare,
    kClamp,
    kSum,
    kBernoulliLogLik,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Input that never receives a gradient.
  Var constant(Vector value);
  Var constant(Scalar value);
  /// Input whose gradient is kept for inspection after backward().
  Var variable(Vector value);

  /// Backpropagates from a scalar output with seed 1.
  void backward(Var output);
  /// Backpropagates from an arbitrary output with an explicit seed.
  void backward(Var output, const Vector& seed);

  void clear();
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  const Vector& value(std::int32_t id) const { return nodes_[id].value; }
  const Vector& grad(std::int32_t id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Op op = Op::kConstant;
    bool needs_grad = false;
    std::int32_t a = -1;
    std::int32_t b = -1;
    Eigen::Index offset = 0;
    Scalar k0 = 0;
    Scalar k1 = 0;
    Parameter* weight = nullptr;
    Parameter* bias = nullptr;
    Vector value;
    Vector grad;
    Vector aux;
  };

  Node& append(Op op, std::int32_t a = -1, std::int32_t b = -1);
  Var finish(Node& node);
  void check_owned(Var v) const;
  void propagate(Node& node);

  std::deque<Node> nodes_;  // references stay valid as the tape grows
  std::size_t count_ = 0;

  friend Var affine(Parameter& weight, Parameter& bias, Var x);
  friend Var concat(Var a, Var b);
  friend Var slice(Var a, Eigen::Index offset, Eigen::Index length);
  friend Var operator+(Var a, Var b);
  friend Var operator-(Var a, Var b);
  friend Var operator*(Var a, Var b);
  friend Var scale(Var v, Var s);
  friend Var affine_const(Var a, Scalar mul, Scalar add);
  friend Var sigmoid(Var a);
  friend Var tanh(Var a);
  friend Var relu(Var a);
  friend Var log(Var a);
  friend Var reciprocal(Var a);
  friend Var square(Var a);
  friend Var clamp(Var a, Scalar lo, Scalar hi);
  friend Var sum(Var a);
  friend Var bernoulli_log_likelihood(Var logits, const Vector& targets);
};

/// weight * x + bias. The parameters must outlive the tape's next clear().
Var affine(Parameter& weight, Parameter& bias, Var x);
Var concat(Var a, Var b);
Var slice(Var a, Eigen::Index offset, Eigen::Index length);

// Elementwise arithmetic; operands must have equal length.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);

/// Vector times a length-one Var.
Var scale(Var v, Var s);
/// mul * a + add, elementwise.
Var affine_const(Var a, Scalar mul, Scalar add);
inline Var operator*(Var a, Scalar k) { return affine_const(a, k, 0); }
inline Var operator*(Scalar k, Var a) { return affine_const(a, k, 0); }
inline Var operator+(Var a, Scalar k) { return affine_const(a, 1, k); }
inline Var operator-(Scalar k, Var a) { return affine_const(a, -1, k); }
inline Var operator-(Var a) { return affine_const(a, -1, 0); }

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var log(Var a);
Var reciprocal(Var a);
Var square(Var a);
/// Clamps elementwise; the gradient is zero where the clamp is active.
Var clamp(Var a, Scalar lo, Scalar hi);
/// Sum of all elements, as a length-one Var.
Var sum(Var a);
/// sum_j [t_j log sigmoid(u_j) + (1 - t_j) log(1 - sigmoid(u_j))], computed
/// stably from the logits u.
Var bernoulli_log_likelihood(Var logits, const Vector& targets);

/// A fresh constant with the same value; blocks gradient flow.
Var stop_gradient(Var v);

/// Numerically stable logistic function for plain values.
Scalar sigmoid(Scalar x);

}  // namespace ham::nn
