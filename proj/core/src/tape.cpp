#include "ugcl/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ugcl/rng.hpp"

namespace ugcl::nn {

Var Tape::constant(DenseMatrix value) { return record(std::move(value), false, nullptr); }

Var Tape::param(ParamStore& store, const std::string& name) {
  Param& p = store.at(name);
  Var v = record(p.value, true, nullptr);
  nodes_[v.id].param = &p;
  return v;
}

double Tape::scalar(Var v) const {
  const DenseMatrix& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw ShapeError("scalar: value is " + shape_string(m));
  return m(0, 0);
}

Var Tape::record(DenseMatrix value, bool requires_grad, BackwardFn fn) {
  if (consumed_) throw TapeError("tape already consumed by backward()");
  nodes_.push_back(Node{std::move(value), {}, requires_grad, std::move(fn), nullptr});
  return Var{nodes_.size() - 1};
}

bool Tape::any_requires_grad(std::initializer_list<Var> inputs) const {
  return std::any_of(inputs.begin(), inputs.end(),
                     [this](Var v) { return nodes_.at(v.id).requires_grad; });
}

DenseMatrix& Tape::grad_slot(Var v) {
  Node& node = nodes_.at(v.id);
  if (node.grad.empty()) node.grad = DenseMatrix(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::backward(Var loss) { backward(loss, DenseMatrix(1, 1, 1.0)); }

void Tape::backward(Var out, const DenseMatrix& seed) {
  if (consumed_) throw TapeError("tape already consumed by backward()");
  if (!seed.same_shape(value(out)))
    throw ShapeError("backward: seed " + shape_string(seed) + " vs output " +
                     shape_string(value(out)));
  consumed_ = true;
  grad_slot(out) += seed;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.backward) node.backward(*this, i);
    if (node.param != nullptr) node.param->grad += node.grad;
  }
}

namespace op {
namespace {

void require_same_shape(const char* what, const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(what) + ": " + shape_string(a) + " vs " + shape_string(b));
}

template <typename F>
DenseMatrix map(const DenseMatrix& x, F f) {
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = f(x.data()[i]);
  return out;
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  DenseMatrix out = nn::matmul(t.value(a), t.value(b));
  return t.record(std::move(out), t.any_requires_grad({a, b}), [a, b](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    if (t.requires_grad(a)) t.grad_slot(a) += nn::matmul_nt(g, t.value(b));
    if (t.requires_grad(b)) t.grad_slot(b) += nn::matmul_tn(t.value(a), g);
  });
}

Var matmul_nt(Tape& t, Var a, Var b) {
  DenseMatrix out = nn::matmul_nt(t.value(a), t.value(b));
  return t.record(std::move(out), t.any_requires_grad({a, b}), [a, b](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    if (t.requires_grad(a)) t.grad_slot(a) += nn::matmul(g, t.value(b));
    if (t.requires_grad(b)) t.grad_slot(b) += nn::matmul_tn(g, t.value(a));
  });
}

Var spmm(Tape& t, std::shared_ptr<const CsrMatrix> s, Var x) {
  DenseMatrix out = nn::spmm(*s, t.value(x));
  return t.record(std::move(out), t.requires_grad(x), [s, x](Tape& t, std::size_t self) {
    t.grad_slot(x) += nn::spmm_t(*s, t.out_grad(self));
  });
}

Var matmul_sparse_t(Tape& t, Var x, std::shared_ptr<const CsrMatrix> s) {
  DenseMatrix out = nn::dense_times_sparse_t(t.value(x), *s);
  return t.record(std::move(out), t.requires_grad(x), [s, x](Tape& t, std::size_t self) {
    // out = x s^T  =>  dx = g s
    const DenseMatrix& g = t.out_grad(self);
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      auto dx_row = dx.row(i);
      auto g_row = g.row(i);
      for (std::size_t j = 0; j < s->rows; ++j) {
        const double gij = g_row[j];
        if (gij == 0.0) continue;
        for (std::size_t p = s->row_ptr[j]; p < s->row_ptr[j + 1]; ++p)
          dx_row[s->col_idx[p]] += gij * s->values[p];
      }
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  require_same_shape("add", t.value(a), t.value(b));
  DenseMatrix out = t.value(a);
  out += t.value(b);
  return t.record(std::move(out), t.any_requires_grad({a, b}), [a, b](Tape& t, std::size_t self) {
    if (t.requires_grad(a)) t.grad_slot(a) += t.out_grad(self);
    if (t.requires_grad(b)) t.grad_slot(b) += t.out_grad(self);
  });
}

Var sub(Tape& t, Var a, Var b) {
  require_same_shape("sub", t.value(a), t.value(b));
  DenseMatrix out = t.value(a);
  out -= t.value(b);
  return t.record(std::move(out), t.any_requires_grad({a, b}), [a, b](Tape& t, std::size_t self) {
    if (t.requires_grad(a)) t.grad_slot(a) += t.out_grad(self);
    if (t.requires_grad(b)) t.grad_slot(b) -= t.out_grad(self);
  });
}

Var mul(Tape& t, Var a, Var b) {
  const DenseMatrix& va = t.value(a);
  const DenseMatrix& vb = t.value(b);
  require_same_shape("mul", va, vb);
  DenseMatrix out(va.rows(), va.cols());
  for (std::size_t i = 0; i < va.size(); ++i) out.data()[i] = va.data()[i] * vb.data()[i];
  return t.record(std::move(out), t.any_requires_grad({a, b}), [a, b](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    if (t.requires_grad(a)) {
      DenseMatrix& da = t.grad_slot(a);
      const DenseMatrix& vb = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) da.data()[i] += g.data()[i] * vb.data()[i];
    }
    if (t.requires_grad(b)) {
      DenseMatrix& db = t.grad_slot(b);
      const DenseMatrix& va = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) db.data()[i] += g.data()[i] * va.data()[i];
    }
  });
}

Var scale(Tape& t, Var a, double s) {
  DenseMatrix out = t.value(a);
  out *= s;
  return t.record(std::move(out), t.requires_grad(a), [a, s](Tape& t, std::size_t self) {
    DenseMatrix g = t.out_grad(self);
    g *= s;
    t.grad_slot(a) += g;
  });
}

Var add_row_bias(Tape& t, Var x, Var b) {
  const DenseMatrix& vx = t.value(x);
  const DenseMatrix& vb = t.value(b);
  if (vb.rows() != 1 || vb.cols() != vx.cols())
    throw ShapeError("add_row_bias: " + shape_string(vx) + " + " + shape_string(vb));
  DenseMatrix out = vx;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += vb(0, j);
  }
  return t.record(std::move(out), t.any_requires_grad({x, b}), [x, b](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    if (t.requires_grad(x)) t.grad_slot(x) += g;
    if (t.requires_grad(b)) {
      DenseMatrix& db = t.grad_slot(b);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) db(0, j) += g(i, j);
    }
  });
}

Var row_scale(Tape& t, Var x, Var w) {
  const DenseMatrix& vx = t.value(x);
  const DenseMatrix& vw = t.value(w);
  if (vw.rows() != vx.rows() || vw.cols() != 1)
    throw ShapeError("row_scale: " + shape_string(vx) + " by " + shape_string(vw));
  DenseMatrix out = vx;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (double& v : out.row(i)) v *= vw(i, 0);
  return t.record(std::move(out), t.any_requires_grad({x, w}), [x, w](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    const DenseMatrix& vx = t.value(x);
    const DenseMatrix& vw = t.value(w);
    if (t.requires_grad(x)) {
      DenseMatrix& dx = t.grad_slot(x);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) dx(i, j) += g(i, j) * vw(i, 0);
    }
    if (t.requires_grad(w)) {
      DenseMatrix& dw = t.grad_slot(w);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < g.cols(); ++j) acc += g(i, j) * vx(i, j);
        dw(i, 0) += acc;
      }
    }
  });
}

Var relu(Tape& t, Var x) {
  DenseMatrix out = map(t.value(x), [](double v) { return v > 0.0 ? v : 0.0; });
  return t.record(std::move(out), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    const DenseMatrix& vx = t.value(x);
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (vx.data()[i] > 0.0) dx.data()[i] += g.data()[i];
  });
}

Var sigmoid(Tape& t, Var x) {
  DenseMatrix out = map(t.value(x), [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  return t.record(std::move(out), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    const DenseMatrix& y = t.value(Var{self});
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double yi = y.data()[i];
      dx.data()[i] += g.data()[i] * yi * (1.0 - yi);
    }
  });
}

Var tanh(Tape& t, Var x) {
  DenseMatrix out = map(t.value(x), [](double v) { return std::tanh(v); });
  return t.record(std::move(out), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    const DenseMatrix& y = t.value(Var{self});
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double yi = y.data()[i];
      dx.data()[i] += g.data()[i] * (1.0 - yi * yi);
    }
  });
}

Var row_softmax(Tape& t, Var x) {
  const DenseMatrix& vx = t.value(x);
  DenseMatrix out(vx.rows(), vx.cols());
  for (std::size_t i = 0; i < vx.rows(); ++i) {
    auto in = vx.row(i);
    auto o = out.row(i);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) z += (o[j] = std::exp(in[j] - mx));
    for (double& v : o) v /= z;
  }
  return t.record(std::move(out), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    const DenseMatrix& y = t.value(Var{self});
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) dx(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var row_log_softmax(Tape& t, Var x) {
  const DenseMatrix& vx = t.value(x);
  DenseMatrix out(vx.rows(), vx.cols());
  for (std::size_t i = 0; i < vx.rows(); ++i) {
    auto in = vx.row(i);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (double v : in) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    auto o = out.row(i);
    for (std::size_t j = 0; j < in.size(); ++j) o[j] = in[j] - lse;
  }
  return t.record(std::move(out), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    const DenseMatrix& y = t.value(Var{self});
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double gsum = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) gsum += g(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) dx(i, j) += g(i, j) - std::exp(y(i, j)) * gsum;
    }
  });
}

Var row_normalize(Tape& t, Var x) {
  const DenseMatrix& vx = t.value(x);
  DenseMatrix out = vx;
  std::vector<double> norms(vx.rows());
  for (std::size_t i = 0; i < vx.rows(); ++i) {
    double sq = 0.0;
    for (double v : vx.row(i)) sq += v * v;
    norms[i] = std::sqrt(sq);
    const double denom = std::max(norms[i], kNormFloor);
    for (double& v : out.row(i)) v /= denom;
  }
  return t.record(std::move(out), t.requires_grad(x),
                  [x, norms = std::move(norms)](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    const DenseMatrix& y = t.value(Var{self});
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      if (norms[i] < kNormFloor) {
        for (std::size_t j = 0; j < g.cols(); ++j) dx(i, j) += g(i, j) / kNormFloor;
        continue;
      }
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j)
        dx(i, j) += (g(i, j) - y(i, j) * dot) / norms[i];
    }
  });
}

Var cosine_matrix(Tape& t, Var u, Var v) {
  return matmul_nt(t, row_normalize(t, u), row_normalize(t, v));
}

Var sum(Tape& t, Var x) {
  DenseMatrix out(1, 1, nn::sum(t.value(x)));
  return t.record(std::move(out), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const double g = t.out_grad(self)(0, 0);
    for (double& v : t.grad_slot(x).data()) v += g;
  });
}

Var trace(Tape& t, Var x) {
  const DenseMatrix& vx = t.value(x);
  if (vx.rows() != vx.cols()) throw ShapeError("trace: " + shape_string(vx));
  double acc = 0.0;
  for (std::size_t i = 0; i < vx.rows(); ++i) acc += vx(i, i);
  return t.record(DenseMatrix(1, 1, acc), t.requires_grad(x), [x](Tape& t, std::size_t self) {
    const double g = t.out_grad(self)(0, 0);
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < dx.rows(); ++i) dx(i, i) += g;
  });
}

Var hconcat(Tape& t, Var a, Var b) {
  const DenseMatrix& va = t.value(a);
  const DenseMatrix& vb = t.value(b);
  if (va.rows() != vb.rows())
    throw ShapeError("hconcat: " + shape_string(va) + " | " + shape_string(vb));
  DenseMatrix out(va.rows(), va.cols() + vb.cols());
  for (std::size_t i = 0; i < va.rows(); ++i) {
    std::copy(va.row(i).begin(), va.row(i).end(), out.row(i).begin());
    std::copy(vb.row(i).begin(), vb.row(i).end(), out.row(i).begin() + va.cols());
  }
  return t.record(std::move(out), t.any_requires_grad({a, b}), [a, b](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    const std::size_t split = t.value(a).cols();
    if (t.requires_grad(a)) {
      DenseMatrix& da = t.grad_slot(a);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < split; ++j) da(i, j) += g(i, j);
    }
    if (t.requires_grad(b)) {
      DenseMatrix& db = t.grad_slot(b);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = split; j < g.cols(); ++j) db(i, j - split) += g(i, j);
    }
  });
}

Var column(Tape& t, Var x, std::size_t j) {
  const DenseMatrix& vx = t.value(x);
  if (j >= vx.cols()) throw ShapeError("column: index out of range for " + shape_string(vx));
  DenseMatrix out(vx.rows(), 1);
  for (std::size_t i = 0; i < vx.rows(); ++i) out(i, 0) = vx(i, j);
  return t.record(std::move(out), t.requires_grad(x), [x, j](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.rows(); ++i) dx(i, j) += g(i, 0);
  });
}

Var select(Tape& t, const std::vector<std::uint8_t>& mask, Var a, Var b) {
  const DenseMatrix& va = t.value(a);
  const DenseMatrix& vb = t.value(b);
  require_same_shape("select", va, vb);
  if (mask.size() != va.size()) throw ShapeError("select: mask length does not match " + shape_string(va));
  DenseMatrix out(va.rows(), va.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = mask[i] ? va.data()[i] : vb.data()[i];
  return t.record(std::move(out), t.any_requires_grad({a, b}),
                  [mask, a, b](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    if (t.requires_grad(a)) {
      DenseMatrix& da = t.grad_slot(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (mask[i]) da.data()[i] += g.data()[i];
    }
    if (t.requires_grad(b)) {
      DenseMatrix& db = t.grad_slot(b);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!mask[i]) db.data()[i] += g.data()[i];
    }
  });
}

Var dropout(Tape& t, Var x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0, 1)");
  if (rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  const DenseMatrix& vx = t.value(x);
  DenseMatrix factor(vx.rows(), vx.cols());
  for (double& f : factor.data()) f = rng.uniform() < rate ? 0.0 : keep_scale;
  DenseMatrix out = vx;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= factor.data()[i];
  return t.record(std::move(out), t.requires_grad(x),
                  [x, factor = std::move(factor)](Tape& t, std::size_t self) {
    const DenseMatrix& g = t.out_grad(self);
    DenseMatrix& dx = t.grad_slot(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx.data()[i] += g.data()[i] * factor.data()[i];
  });
}

Var softmax_cross_entropy(Tape& t, Var logits, const std::vector<std::uint32_t>& rows,
                          const std::vector<int>& labels) {
  const DenseMatrix& z = t.value(logits);
  if (rows.size() != labels.size()) throw std::invalid_argument("softmax_cross_entropy: rows/labels length mismatch");
  if (rows.empty()) throw std::invalid_argument("softmax_cross_entropy: no rows");
  DenseMatrix probs(rows.size(), z.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= z.rows() || labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= z.cols())
      throw std::out_of_range("softmax_cross_entropy: row or label out of range");
    const auto in = z.row(rows[r]);
    const auto label = static_cast<std::size_t>(labels[r]);
    const double mx = *std::max_element(in.begin(), in.end());
    double zsum = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) zsum += (probs(r, j) = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < in.size(); ++j) probs(r, j) /= zsum;
    loss -= in[label] - mx - std::log(zsum);
  }
  const double inv_count = 1.0 / static_cast<double>(rows.size());
  loss *= inv_count;
  return t.record(DenseMatrix(1, 1, loss), t.requires_grad(logits),
                  [logits, rows, labels, probs = std::move(probs), inv_count](Tape& t, std::size_t self) {
    const double g = t.out_grad(self)(0, 0) * inv_count;
    DenseMatrix& dz = t.grad_slot(logits);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t j = 0; j < probs.cols(); ++j) {
        const double target = static_cast<std::size_t>(labels[r]) == j ? 1.0 : 0.0;
        dz(rows[r], j) += g * (probs(r, j) - target);
      }
    }
  });
}

}  // namespace op
}  // namespace ugcl::nn

namespace ugcl::nn {

Var ParamBinding::operator()(const std::string& name) {
  if (auto it = bound_.find(name); it != bound_.end()) return it->second;
  const Var v = mutable_store_ ? tape_.param(*mutable_store_, name) : tape_.constant(store_->value(name));
  bound_.emplace(name, v);
  return v;
}

Var maybe_dropout(Tape& t, Var x, const ForwardMode& mode) {
  return mode.training() ? op::dropout(t, x, mode.dropout, *mode.rng) : x;
}

void add_mlp2(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::size_t out, Rng& rng) {
  add_affine(store, prefix + ".l1", in, hidden, rng);
  add_affine(store, prefix + ".l2", hidden, out, rng);
}

Var mlp2_forward(ParamBinding& params, const std::string& prefix, Var x, const ForwardMode& mode) {
  Tape& t = params.tape();
  Var h = op::add_row_bias(t, op::matmul(t, x, params(prefix + ".l1.W")), params(prefix + ".l1.b"));
  h = maybe_dropout(t, op::relu(t, h), mode);
  return op::add_row_bias(t, op::matmul(t, h, params(prefix + ".l2.W")), params(prefix + ".l2.b"));
}

DenseMatrix mlp2_forward(const ParamStore& params, const std::string& prefix, const DenseMatrix& x) {
  Tape t;
  ParamBinding bind(t, params);
  return t.value(mlp2_forward(bind, prefix, t.constant(x)));
}

}  // namespace ugcl::nn
