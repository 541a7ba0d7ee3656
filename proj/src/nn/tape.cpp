#include "ham/nn/tape.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace ham::nn {

namespace {

const char* op_name(Tape::Op op) {
  switch (op) {
    case Tape::Op::kConstant: return "constant";
    case Tape::Op::kVariable: return "variable";
    case Tape::Op::kAffine: return "affine";
    case Tape::Op::kConcat: return "concat";
    case Tape::Op::kSlice: return "slice";
    case Tape::Op::kAdd: return "add";
    case Tape::Op::kSub: return "sub";
    case Tape::Op::kMul: return "mul";
    case Tape::Op::kScale: return "scale";
    case Tape::Op::kAffineConst: return "affine_const";
    case Tape::Op::kSigmoid: return "sigmoid";
    case Tape::Op::kTanh: return "tanh";
    case Tape::Op::kRelu: return "relu";
    case Tape::Op::kLog: return "log";
    case Tape::Op::kReciprocal: return "reciprocal";
    case Tape::Op::kSquare: return "square";
    case Tape::Op::kClamp: return "clamp";
    case Tape::Op::kSum: return "sum";
    case Tape::Op::kBernoulliLogLik: return "bernoulli_log_likelihood";
  }
  return "?";
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw UsageError("operation on an unrecorded Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  if (!a.valid() || !b.valid()) throw UsageError("operation on an unrecorded Var");
  if (a.tape() != b.tape()) throw UsageError("operands recorded on different tapes");
  return *a.tape();
}

void require_same_size(Var a, Var b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": size " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

// log(sigmoid(x)) without overflow.
Scalar log_sigmoid(Scalar x) {
  return -(std::max(-x, Scalar{0}) + std::log1p(std::exp(-std::abs(x))));
}

}  // namespace

Scalar sigmoid(Scalar x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (1.0 + e);
}

const Vector& Var::value() const {
  if (!valid()) throw UsageError("value() on an unrecorded Var");
  return tape_->value(id_);
}

const Vector& Var::grad() const {
  if (!valid()) throw UsageError("grad() on an unrecorded Var");
  return tape_->grad(id_);
}

Scalar Var::scalar() const {
  const Vector& v = value();
  if (v.size() != 1) throw DimensionError("scalar() on a Var of size " + std::to_string(v.size()));
  return v(0);
}

Tape::Node& Tape::append(Op op, std::int32_t a, std::int32_t b) {
  if (count_ == nodes_.size()) nodes_.emplace_back();
  Node& n = nodes_[count_++];
  n.op = op;
  n.a = a;
  n.b = b;
  n.offset = 0;
  n.k0 = n.k1 = 0;
  n.weight = n.bias = nullptr;
  n.needs_grad = (a >= 0 && nodes_[a].needs_grad) || (b >= 0 && nodes_[b].needs_grad);
  return n;
}

Var Tape::finish(Node& node) {
  if (!node.value.allFinite()) {
    const auto id = static_cast<std::int32_t>(count_ - 1);
    --count_;
    throw NumericalError(std::string("non-finite value produced by ") + op_name(node.op) +
                         " (node " + std::to_string(id) + ")");
  }
  return Var(this, static_cast<std::int32_t>(count_ - 1));
}

void Tape::check_owned(Var v) const {
  if (v.tape() != this || v.id() < 0 || static_cast<std::size_t>(v.id()) >= count_) {
    throw UsageError("backward on a Var that was not recorded on this tape");
  }
}

Var Tape::constant(Vector value) {
  Node& n = append(Op::kConstant);
  n.value = std::move(value);
  return finish(n);
}

Var Tape::constant(Scalar value) {
  Node& n = append(Op::kConstant);
  n.value.resize(1);
  n.value(0) = value;
  return finish(n);
}

Var Tape::variable(Vector value) {
  Node& n = append(Op::kVariable);
  n.value = std::move(value);
  n.needs_grad = true;
  return finish(n);
}

void Tape::clear() { count_ = 0; }

void Tape::backward(Var output) {
  if (empty()) throw UsageError("backward called without a recorded forward pass");
  check_owned(output);
  if (nodes_[output.id()].value.size() != 1) {
    throw DimensionError("backward without a seed requires a scalar output");
  }
  backward(output, Vector::Ones(1));
}

void Tape::backward(Var output, const Vector& seed) {
  if (empty()) throw UsageError("backward called without a recorded forward pass");
  check_owned(output);
  const auto last = static_cast<std::size_t>(output.id());
  if (seed.size() != nodes_[last].value.size()) {
    throw DimensionError("seed gradient does not match output shape");
  }
  for (std::size_t i = 0; i <= last; ++i) {
    if (nodes_[i].needs_grad) nodes_[i].grad.setZero(nodes_[i].value.size());
  }
  nodes_[last].grad = seed;
  for (std::size_t i = last + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.needs_grad) propagate(n);
  }
}

void Tape::propagate(Node& n) {
  const Vector& g = n.grad;
  Node* a = n.a >= 0 ? &nodes_[n.a] : nullptr;
  Node* b = n.b >= 0 ? &nodes_[n.b] : nullptr;
  const bool ga = a != nullptr && a->needs_grad;
  const bool gb = b != nullptr && b->needs_grad;
  switch (n.op) {
    case Op::kConstant:
    case Op::kVariable:
      break;
    case Op::kAffine:
      n.weight->grad.noalias() += g * a->value.transpose();
      n.bias->grad.col(0) += g;
      if (ga) a->grad.noalias() += n.weight->value.transpose() * g;
      break;
    case Op::kConcat:
      if (ga) a->grad += g.head(a->value.size());
      if (gb) b->grad += g.tail(b->value.size());
      break;
    case Op::kSlice:
      if (ga) a->grad.segment(n.offset, g.size()) += g;
      break;
    case Op::kAdd:
      if (ga) a->grad += g;
      if (gb) b->grad += g;
      break;
    case Op::kSub:
      if (ga) a->grad += g;
      if (gb) b->grad -= g;
      break;
    case Op::kMul:
      if (ga) a->grad.array() += g.array() * b->value.array();
      if (gb) b->grad.array() += g.array() * a->value.array();
      break;
    case Op::kScale:
      if (ga) a->grad += g * b->value(0);
      if (gb) b->grad(0) += g.dot(a->value);
      break;
    case Op::kAffineConst:
      if (ga) a->grad += n.k0 * g;
      break;
    case Op::kSigmoid:
      if (ga) a->grad.array() += g.array() * n.value.array() * (1.0 - n.value.array());
      break;
    case Op::kTanh:
      if (ga) a->grad.array() += g.array() * (1.0 - n.value.array().square());
      break;
    case Op::kRelu:
      if (ga) a->grad.array() += (a->value.array() > 0).select(g.array(), 0.0);
      break;
    case Op::kLog:
      if (ga) a->grad.array() += g.array() / a->value.array();
      break;
    case Op::kReciprocal:
      if (ga) a->grad.array() -= g.array() * n.value.array().square();
      break;
    case Op::kSquare:
      if (ga) a->grad.array() += 2.0 * g.array() * a->value.array();
      break;
    case Op::kClamp:
      if (ga) {
        a->grad.array() +=
            (a->value.array() >= n.k0 && a->value.array() <= n.k1).select(g.array(), 0.0);
      }
      break;
    case Op::kSum:
      if (ga) a->grad.array() += g(0);
      break;
    case Op::kBernoulliLogLik:
      if (ga) {
        for (Eigen::Index j = 0; j < a->value.size(); ++j) {
          a->grad(j) += g(0) * (n.aux(j) - sigmoid(a->value(j)));
        }
      }
      break;
  }
}

Var affine(Parameter& weight, Parameter& bias, Var x) {
  Tape& t = tape_of(x);
  if (weight.value.cols() != x.size() || bias.value.rows() != weight.value.rows() ||
      bias.value.cols() != 1) {
    throw DimensionError("affine: weight " + std::to_string(weight.value.rows()) + "x" +
                         std::to_string(weight.value.cols()) + " applied to input of size " +
                         std::to_string(x.size()));
  }
  Tape::Node& n = t.append(Tape::Op::kAffine, x.id());
  n.weight = &weight;
  n.bias = &bias;
  n.needs_grad = true;
  n.value.noalias() = weight.value * t.nodes_[x.id()].value;
  n.value += bias.value.col(0);
  return t.finish(n);
}

Var concat(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Tape::Node& n = t.append(Tape::Op::kConcat, a.id(), b.id());
  const Vector& va = t.nodes_[a.id()].value;
  const Vector& vb = t.nodes_[b.id()].value;
  n.value.resize(va.size() + vb.size());
  n.value.head(va.size()) = va;
  n.value.tail(vb.size()) = vb;
  return t.finish(n);
}

Var slice(Var a, Eigen::Index offset, Eigen::Index length) {
  Tape& t = tape_of(a);
  if (offset < 0 || length <= 0 || offset + length > a.size()) {
    throw DimensionError("slice out of range");
  }
  Tape::Node& n = t.append(Tape::Op::kSlice, a.id());
  n.offset = offset;
  n.value = t.nodes_[a.id()].value.segment(offset, length);
  return t.finish(n);
}

Var operator+(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_size(a, b, "add");
  Tape::Node& n = t.append(Tape::Op::kAdd, a.id(), b.id());
  n.value = t.nodes_[a.id()].value + t.nodes_[b.id()].value;
  return t.finish(n);
}

Var operator-(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_size(a, b, "sub");
  Tape::Node& n = t.append(Tape::Op::kSub, a.id(), b.id());
  n.value = t.nodes_[a.id()].value - t.nodes_[b.id()].value;
  return t.finish(n);
}

Var operator*(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_size(a, b, "mul");
  Tape::Node& n = t.append(Tape::Op::kMul, a.id(), b.id());
  n.value = t.nodes_[a.id()].value.cwiseProduct(t.nodes_[b.id()].value);
  return t.finish(n);
}

Var scale(Var v, Var s) {
  Tape& t = tape_of(v, s);
  if (s.size() != 1) throw DimensionError("scale: multiplier must be a scalar");
  Tape::Node& n = t.append(Tape::Op::kScale, v.id(), s.id());
  n.value = t.nodes_[v.id()].value * t.nodes_[s.id()].value(0);
  return t.finish(n);
}

Var affine_const(Var a, Scalar mul, Scalar add) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kAffineConst, a.id());
  n.k0 = mul;
  n.k1 = add;
  n.value = (mul * t.nodes_[a.id()].value.array() + add).matrix();
  return t.finish(n);
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kSigmoid, a.id());
  n.value = t.nodes_[a.id()].value.unaryExpr([](Scalar x) { return sigmoid(x); });
  return t.finish(n);
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kTanh, a.id());
  n.value = t.nodes_[a.id()].value.array().tanh().matrix();
  return t.finish(n);
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kRelu, a.id());
  n.value = t.nodes_[a.id()].value.cwiseMax(0.0);
  return t.finish(n);
}

Var log(Var a) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kLog, a.id());
  n.value = t.nodes_[a.id()].value.array().log().matrix();
  return t.finish(n);
}

Var reciprocal(Var a) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kReciprocal, a.id());
  n.value = t.nodes_[a.id()].value.array().inverse().matrix();
  return t.finish(n);
}

Var square(Var a) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kSquare, a.id());
  n.value = t.nodes_[a.id()].value.array().square().matrix();
  return t.finish(n);
}

Var clamp(Var a, Scalar lo, Scalar hi) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kClamp, a.id());
  n.k0 = lo;
  n.k1 = hi;
  n.value = t.nodes_[a.id()].value.cwiseMax(lo).cwiseMin(hi);
  return t.finish(n);
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  Tape::Node& n = t.append(Tape::Op::kSum, a.id());
  n.value.resize(1);
  n.value(0) = t.nodes_[a.id()].value.sum();
  return t.finish(n);
}

Var bernoulli_log_likelihood(Var logits, const Vector& targets) {
  Tape& t = tape_of(logits);
  if (targets.size() != logits.size()) {
    throw DimensionError("bernoulli_log_likelihood: target width mismatch");
  }
  Tape::Node& n = t.append(Tape::Op::kBernoulliLogLik, logits.id());
  const Vector& u = t.nodes_[logits.id()].value;
  n.aux = targets;
  Scalar total = 0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    total += targets(j) * log_sigmoid(u(j)) + (1.0 - targets(j)) * log_sigmoid(-u(j));
  }
  n.value.resize(1);
  n.value(0) = total;
  return t.finish(n);
}

Var stop_gradient(Var v) { return tape_of(v).constant(v.value()); }

}  // namespace ham::nn
