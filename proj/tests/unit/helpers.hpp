#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ugcl/graph/graph_dataset.hpp"
#include "ugcl/nn/dense_matrix.hpp"
#include "ugcl/nn/finite_diff.hpp"
#include "ugcl/nn/param_store.hpp"
#include "ugcl/nn/tape.hpp"
#include "ugcl/rng.hpp"

namespace ugcl::test {

using Grid = std::vector<std::vector<double>>;

inline nn::DenseMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  nn::DenseMatrix m(r, c);
  for (auto& v : m.data()) v = scale * rng.normal();
  return m;
}

inline Grid to_grid(const nn::DenseMatrix& m) {
  Grid g(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

// Straightforward loop implementations used as oracles.
inline Grid grid_mul(const Grid& a, const Grid& b) {
  Grid out(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Grid grid_relu(Grid g) {
  for (auto& row : g)
    for (auto& v : row) v = v > 0 ? v : 0.0;
  return g;
}

inline Grid grid_add_bias(Grid g, const std::vector<double>& b) {
  for (auto& row : g)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
  return g;
}

inline double grid_max_diff(const Grid& a, const nn::DenseMatrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - m(i, j)));
  return worst;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// -sum_i log(exp(c_ii / t) / sum_j exp(c_ij / t)) with c = cos(u_i, v_j).
inline double info_nce_oracle(const Grid& u, const Grid& v, double t) {
  double total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) denom += std::exp(cosine(u[i], v[j]) / t);
    total -= std::log(std::exp(cosine(u[i], v[i]) / t) / denom);
  }
  return total;
}

/// Analytic gradients (trainable binding + backward) against central finite
/// differences (frozen binding), for a loss recorded by `f`.
inline nn::GradComparison check_gradients(nn::ParamStore& store,
                                          const std::function<nn::Var(nn::ParamBinding&)>& f,
                                          double rel_tol = 1e-4) {
  store.zero_grad();
  {
    nn::Tape tape;
    nn::ParamBinding b(tape, store);
    tape.backward(f(b));
  }
  const nn::GradMap analytic = nn::collect_grads(store);
  const nn::GradMap numeric = nn::finite_diff_grad(
      [&](const nn::ParamStore& p) {
        nn::Tape tape;
        nn::ParamBinding b(tape, p);
        return tape.scalar(f(b));
      },
      store);
  return nn::compare_grads(analytic, numeric, rel_tol);
}

inline std::vector<graph::Edge> path_edges(std::size_t n) {
  std::vector<graph::Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back(graph::make_edge(i, i + 1));
  return e;
}

inline std::vector<graph::Edge> random_edges(std::size_t n, double p, Rng& rng) {
  std::vector<graph::Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) e.push_back(graph::make_edge(i, j));
  return e;
}

}  // namespace ugcl::test
