#include "ugcl/structure_path.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ugcl/log.hpp"

namespace ugcl {

void PprConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ppr alpha must lie in (0, 1)");
  if (!(tol > 0.0)) throw std::invalid_argument("ppr tol must be positive");
  if (max_iter == 0) throw std::invalid_argument("ppr max_iter must be positive");
}

namespace {

std::vector<double> inv_sqrt_degrees(const std::vector<graph::Edge>& edges, std::size_t n) {
  std::vector<double> deg(n, 1.0);
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) throw std::out_of_range("normalize_adjacency: edge endpoint out of range");
    deg[e.u] += 1.0;
    deg[e.v] += 1.0;
  }
  for (double& v : deg) v = 1.0 / std::sqrt(v);
  return deg;
}

}  // namespace

nn::DenseMatrix normalize_adjacency(const std::vector<graph::Edge>& edges, std::size_t n) {
  const auto s = inv_sqrt_degrees(edges, n);
  nn::DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = s[i] * s[i];
  for (const auto& e : edges) {
    const double w = s[e.u] * s[e.v];
    out(e.u, e.v) = w;
    out(e.v, e.u) = w;
  }
  return out;
}

nn::CsrMatrix normalize_adjacency_sparse(const std::vector<graph::Edge>& edges, std::size_t n) {
  const auto s = inv_sqrt_degrees(edges, n);
  std::vector<std::vector<std::uint32_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) nbrs[i].push_back(static_cast<std::uint32_t>(i));
  for (const auto& e : edges) {
    nbrs[e.u].push_back(e.v);
    nbrs[e.v].push_back(e.u);
  }
  nn::CsrMatrix out;
  out.rows = out.cols = n;
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(nbrs[i].begin(), nbrs[i].end());
    for (std::uint32_t j : nbrs[i]) {
      out.col_idx.push_back(j);
      out.values.push_back(s[i] * s[j]);
    }
    out.row_ptr.push_back(out.values.size());
  }
  return out;
}

nn::DenseMatrix ppr_closed_form(const nn::DenseMatrix& a_norm, double alpha) {
  if (a_norm.rows() != a_norm.cols()) throw nn::ShapeError("ppr_closed_form: matrix must be square");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("ppr_closed_form: alpha must lie in (0, 1]");
  const std::size_t n = a_norm.rows();

  // Lower Cholesky factor of M = I - (1 - alpha) A_norm, row-major.
  nn::DenseMatrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = (i == j ? 1.0 : 0.0) - (1.0 - alpha) * a_norm(i, j);
      const auto li = l.row(i);
      const auto lj = l.row(j);
      for (std::size_t k = 0; k < j; ++k) acc -= li[k] * lj[k];
      if (i == j) {
        if (!(acc > 0.0)) throw std::runtime_error("ppr_closed_form: system matrix is not positive definite");
        l(i, i) = std::sqrt(acc);
      } else {
        l(i, j) = acc / l(j, j);
      }
    }
  }

  // L Y = alpha I, row by row.
  nn::DenseMatrix y(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto yi = y.row(i);
    yi[i] = alpha;
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = l(i, k);
      if (lik == 0.0) continue;
      const auto yk = y.row(k);
      for (std::size_t c = 0; c <= k; ++c) yi[c] -= lik * yk[c];
    }
    const double inv = 1.0 / l(i, i);
    for (std::size_t c = 0; c <= i; ++c) yi[c] *= inv;
  }

  // L^T X = Y, from the last row up.
  nn::DenseMatrix x(n, n);
  for (std::size_t i = n; i-- > 0;) {
    auto xi = x.row(i);
    const auto yi = y.row(i);
    std::copy(yi.begin(), yi.end(), xi.begin());
    for (std::size_t k = i + 1; k < n; ++k) {
      const double lki = l(k, i);
      if (lki == 0.0) continue;
      const auto xk = x.row(k);
      for (std::size_t c = 0; c < n; ++c) xi[c] -= lki * xk[c];
    }
    const double inv = 1.0 / l(i, i);
    for (double& v : xi) v *= inv;
  }
  return x;
}

PowerIterationResult ppr_power_iteration(const nn::DenseMatrix& a_norm, double alpha, double tol,
                                         std::size_t max_iter) {
  if (a_norm.rows() != a_norm.cols()) throw nn::ShapeError("ppr_power_iteration: matrix must be square");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("ppr_power_iteration: alpha must lie in (0, 1]");
  if (!(tol > 0.0)) throw std::invalid_argument("ppr_power_iteration: tol must be positive");
  const std::size_t n = a_norm.rows();
  const nn::CsrMatrix sparse = nn::CsrMatrix::from_dense(a_norm);

  PowerIterationResult result;
  result.matrix = nn::DenseMatrix::identity(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    nn::DenseMatrix next = nn::spmm(sparse, result.matrix);
    next *= 1.0 - alpha;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += alpha;
    result.last_change = nn::max_abs_diff(next, result.matrix);
    result.matrix = std::move(next);
    result.iterations = it + 1;
    if (result.last_change < tol) {
      result.converged = true;
      return result;
    }
  }
  log_warning("ppr_power_iteration: no convergence after " + std::to_string(max_iter) +
              " iterations (last change " + std::to_string(result.last_change) + ")");
  return result;
}

nn::DenseMatrix knn_sparsify(const nn::DenseMatrix& a, std::size_t k) {
  const std::size_t n = a.cols();
  if (k > n) log_warning("knn_sparsify: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n) + "; keeping all");
  if (k == 0 || k >= n) return a;

  nn::DenseMatrix out(a.rows(), n);
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    std::iota(order.begin(), order.end(), 0u);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::uint32_t x, std::uint32_t y) { return row[x] > row[y] || (row[x] == row[y] && x < y); });
    for (std::size_t r = 0; r < k; ++r) out(i, order[r]) = row[order[r]];
  }
  return out;
}

StructureGraph build_structure_graph(const std::vector<graph::Edge>& edges, std::size_t n,
                                     const PprConfig& config) {
  config.validate();
  const nn::DenseMatrix a_norm = normalize_adjacency(edges, n);
  StructureGraph g;
  if (config.method == PprMethod::kClosedForm) {
    g.a_sr_dense = ppr_closed_form(a_norm, config.alpha);
  } else {
    g.a_sr_dense = ppr_power_iteration(a_norm, config.alpha, config.tol, config.max_iter).matrix;
  }
  g.a_sr = knn_sparsify(g.a_sr_dense, config.k);
  g.a_sr_csr = std::make_shared<const nn::CsrMatrix>(nn::CsrMatrix::from_dense(g.a_sr));
  return g;
}

void add_structure_params(nn::ParamStore& store, std::size_t n, std::size_t pe_dim, std::size_t hidden,
                          std::size_t d, Rng& rng) {
  nn::add_affine(store, kPositionalPrefix, n, pe_dim, rng);
  store.add(kPpnpPrefix + ".W0", nn::glorot_uniform(pe_dim, hidden, rng));
  store.add(kPpnpPrefix + ".W1", nn::glorot_uniform(hidden, d, rng));
}

nn::Var positional_features(nn::ParamBinding& params) {
  // I_n W + b is the weight table itself plus the bias.
  return nn::op::add_row_bias(params.tape(), params(kPositionalPrefix + ".W"), params(kPositionalPrefix + ".b"));
}

nn::Var ppnp_forward(nn::ParamBinding& params, const std::shared_ptr<const nn::CsrMatrix>& a_sr,
                     nn::Var x_pe, const nn::ForwardMode& mode) {
  nn::Tape& t = params.tape();
  nn::Var h = nn::op::spmm(t, a_sr, nn::op::matmul(t, x_pe, params(kPpnpPrefix + ".W0")));
  h = nn::maybe_dropout(t, nn::op::relu(t, h), mode);
  return nn::op::matmul(t, nn::op::spmm(t, a_sr, h), params(kPpnpPrefix + ".W1"));
}

StructurePathOut run_structure_path(const StructureGraph& graph, const nn::ParamStore& params) {
  nn::Tape t;
  nn::ParamBinding bind(t, params);
  const nn::Var x_pe = positional_features(bind);
  const nn::Var z_sr = ppnp_forward(bind, graph.a_sr_csr, x_pe);
  return {graph.a_sr_dense, graph.a_sr, t.value(x_pe), t.value(z_sr)};
}

}  // namespace ugcl
