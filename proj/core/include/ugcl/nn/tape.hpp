#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ugcl/nn/csr_matrix.hpp"
#include "ugcl/nn/dense_matrix.hpp"
#include "ugcl/nn/param_store.hpp"

namespace ugcl {
class Rng;
}

namespace ugcl::nn {

class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode gradient tape over a fixed set of dense matrix operations.
///
/// Forward ops (namespace `op`) evaluate eagerly and append a node with its
/// backward rule. `backward` walks the nodes once in reverse and accumulates
/// into the gradient slots of every ParamStore entry bound with `param`.
/// A tape is single-use: a second `backward` throws.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Var constant(DenseMatrix value);
  /// Binds a parameter; its value is copied onto the tape and the gradient
  /// is accumulated into `store.at(name).grad` on backward.
  Var param(ParamStore& store, const std::string& name);

  const DenseMatrix& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient of the last backward seed w.r.t. `v`; empty if unreached.
  const DenseMatrix& grad(Var v) const { return nodes_.at(v.id).grad; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  double scalar(Var v) const;

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 `loss`.
  void backward(Var loss);
  void backward(Var out, const DenseMatrix& seed);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool consumed() const noexcept { return consumed_; }

  // Used by op implementations.
  Var record(DenseMatrix value, bool requires_grad, BackwardFn fn);
  bool any_requires_grad(std::initializer_list<Var> inputs) const;
  /// Gradient slot for accumulation; allocated with zeros on first access.
  DenseMatrix& grad_slot(Var v);
  const DenseMatrix& out_grad(std::size_t self) const { return nodes_[self].grad; }

 private:
  struct Node {
    DenseMatrix value;
    DenseMatrix grad;
    bool requires_grad = false;
    BackwardFn backward;
    Param* param = nullptr;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

namespace op {

Var matmul(Tape& t, Var a, Var b);
/// a * b^T
Var matmul_nt(Tape& t, Var a, Var b);
/// s * x for a constant sparse s.
Var spmm(Tape& t, std::shared_ptr<const CsrMatrix> s, Var x);
/// x * s^T for a constant sparse s.
Var matmul_sparse_t(Tape& t, Var x, std::shared_ptr<const CsrMatrix> s);

Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
/// x (n x m) + b (1 x m) broadcast over rows.
Var add_row_bias(Tape& t, Var x, Var b);
/// x (n x m) with row i multiplied by w(i, 0); w is n x 1.
Var row_scale(Tape& t, Var x, Var w);

Var relu(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var tanh(Tape& t, Var x);

Var row_softmax(Tape& t, Var x);
Var row_log_softmax(Tape& t, Var x);

/// Row i divided by max(||row i||, kNormFloor).
Var row_normalize(Tape& t, Var x);
inline constexpr double kNormFloor = 1e-12;
/// out(i, j) = cos(u_i, v_j), zero norms floored at kNormFloor.
Var cosine_matrix(Tape& t, Var u, Var v);

Var sum(Tape& t, Var x);
/// Sum of the diagonal of a square matrix, 1x1.
Var trace(Tape& t, Var x);

Var hconcat(Tape& t, Var a, Var b);
Var column(Tape& t, Var x, std::size_t j);

/// out = mask ? a : b elementwise; `mask` is row-major with x's shape.
Var select(Tape& t, const std::vector<std::uint8_t>& mask, Var a, Var b);

/// Inverted dropout with keep probability 1 - rate. Identity if rate == 0.
Var dropout(Tape& t, Var x, double rate, Rng& rng);

/// Mean softmax cross-entropy over the listed rows, 1x1.
Var softmax_cross_entropy(Tape& t, Var logits, const std::vector<std::uint32_t>& rows,
                          const std::vector<int>& labels);

}  // namespace op
}  // namespace ugcl::nn

namespace ugcl::nn {

/// Resolves parameter names to tape variables, once per name.
///
/// A trainable binding routes gradients into the store; a frozen binding
/// copies values onto the tape as constants (pure evaluation).
class ParamBinding {
 public:
  ParamBinding(Tape& tape, ParamStore& store) : tape_(tape), mutable_store_(&store), store_(&store) {}
  ParamBinding(Tape& tape, const ParamStore& store) : tape_(tape), store_(&store) {}

  Var operator()(const std::string& name);
  Tape& tape() noexcept { return tape_; }
  bool trainable() const noexcept { return mutable_store_ != nullptr; }

 private:
  Tape& tape_;
  ParamStore* mutable_store_ = nullptr;
  const ParamStore* store_;
  std::map<std::string, Var, std::less<>> bound_;
};

/// Dropout applies only when `dropout > 0` and an rng is supplied.
struct ForwardMode {
  double dropout = 0.0;
  Rng* rng = nullptr;

  bool training() const noexcept { return dropout > 0.0 && rng != nullptr; }
};

Var maybe_dropout(Tape& t, Var x, const ForwardMode& mode);

/// Registers prefix.l1.{W,b} (in x hidden) and prefix.l2.{W,b} (hidden x out).
void add_mlp2(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::size_t out, Rng& rng);

/// ReLU(x W1 + b1) W2 + b2, with dropout after the hidden activation.
Var mlp2_forward(ParamBinding& params, const std::string& prefix, Var x, const ForwardMode& mode = {});
DenseMatrix mlp2_forward(const ParamStore& params, const std::string& prefix, const DenseMatrix& x);

}  // namespace ugcl::nn
