#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "ugcl/nn/csr_matrix.hpp"
#include "ugcl/structure_path.hpp"

using namespace ugcl;
using namespace ugcl::nn;

namespace {

/// Inverse of a small dense matrix by Gauss-Jordan elimination with pivoting.
test::Grid invert(test::Grid a) {
  const std::size_t n = a.size();
  test::Grid inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(inv[c], inv[p]);
    const double piv = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

std::shared_ptr<const CsrMatrix> csr(const DenseMatrix& m) {
  return std::make_shared<const CsrMatrix>(CsrMatrix::from_dense(m));
}

DenseMatrix ppnp_value(const ParamStore& store, const DenseMatrix& a, const DenseMatrix& x_pe) {
  Tape t;
  ParamBinding b(t, store);
  return t.value(ppnp_forward(b, csr(a), t.constant(x_pe)));
}

}  // namespace

TEST_SUITE("structure_path") {
  TEST_CASE("normalization examples") {
    CHECK(normalize_adjacency({}, 1) == DenseMatrix{{1.0}});
    const auto two = normalize_adjacency({{0, 1}}, 2);
    for (double v : two.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("normalized adjacency rescaled by D^1/2 has the degrees of A + I as row sums") {
    Rng rng(1);
    const auto edges = test::random_edges(10, 0.3, rng);
    const auto a = normalize_adjacency(edges, 10);
    std::vector<double> deg(10, 1.0);
    for (const auto& e : edges) {
      deg[e.u] += 1;
      deg[e.v] += 1;
    }
    for (std::size_t i = 0; i < 10; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 10; ++j) row += std::sqrt(deg[i]) * a(i, j) * std::sqrt(deg[j]);
      CHECK(row == doctest::Approx(deg[i]).epsilon(1e-12));
    }
    CHECK(max_abs_diff(normalize_adjacency_sparse(edges, 10).to_dense(), a) < 1e-15);
  }

  TEST_CASE("closed form examples") {
    for (double alpha : {0.1, 0.5, 0.9}) CHECK(ppr_closed_form(normalize_adjacency({}, 1), alpha)(0, 0) ==
                                               doctest::Approx(1.0).epsilon(1e-14));
    const auto two = ppr_closed_form(normalize_adjacency({{0, 1}}, 2), 0.5);
    CHECK(max_abs_diff(two, DenseMatrix{{0.75, 0.25}, {0.25, 0.75}}) < 1e-14);
    Rng rng(2);
    const auto a = normalize_adjacency(test::random_edges(8, 0.4, rng), 8);
    CHECK(max_abs_diff(ppr_closed_form(a, 0.999), DenseMatrix::identity(8)) < 2e-3);
    CHECK_THROWS(ppr_closed_form(a, 0.0));
  }

  TEST_CASE("2x2 case against an explicit inverse") {
    const auto a = normalize_adjacency({{0, 1}}, 2);
    const double alpha = 0.5;
    test::Grid m{{1 - (1 - alpha) * a(0, 0), -(1 - alpha) * a(0, 1)},
                 {-(1 - alpha) * a(1, 0), 1 - (1 - alpha) * a(1, 1)}};
    auto inv = invert(m);
    for (auto& row : inv)
      for (auto& v : row) v *= alpha;
    CHECK(test::grid_max_diff(inv, ppr_closed_form(a, alpha)) < 1e-14);
  }

  TEST_CASE("closed form matches an independent inverse on random graphs") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t n = 5 + trial * 4;
      const auto a = normalize_adjacency(test::random_edges(n, 0.3, rng), n);
      const double alpha = 0.15 + 0.15 * trial;
      test::Grid m(n, std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = (i == j) - (1 - alpha) * a(i, j);
      auto inv = invert(m);
      for (auto& row : inv)
        for (auto& v : row) v *= alpha;
      CHECK(test::grid_max_diff(inv, ppr_closed_form(a, alpha)) < 1e-12);
    }
  }

  TEST_CASE("power iteration examples") {
    Rng rng(4);
    const auto a = normalize_adjacency(test::random_edges(6, 0.5, rng), 6);
    const auto one = ppr_power_iteration(a, 1.0, 1e-12, 100);
    CHECK(one.matrix == DenseMatrix::identity(6));
    CHECK(one.converged);
    const auto two = ppr_power_iteration(normalize_adjacency({{0, 1}}, 2), 0.5, 1e-10, 1000);
    CHECK(max_abs_diff(two.matrix, DenseMatrix{{0.75, 0.25}, {0.25, 0.75}}) < 1e-9);
    const auto capped = ppr_power_iteration(a, 0.1, 1e-14, 3);
    CHECK(!capped.converged);
    CHECK(capped.iterations == 3);
  }

  TEST_CASE("power iteration agrees with the closed form") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 2 + rng.below(60);
      const auto a = normalize_adjacency(test::random_edges(n, rng.uniform() * 0.3, rng), n);
      for (double alpha : {0.1, 0.5, 0.9}) {
        const auto p = ppr_power_iteration(a, alpha, 1e-10, 10000);
        CHECK(p.converged);
        CHECK(max_abs_diff(p.matrix, ppr_closed_form(a, alpha)) < 1e-8);
      }
    }
  }

  TEST_CASE("closed form is nonnegative and equals the truncated series") {
    Rng rng(6);
    const std::size_t n = 12;
    const auto a = normalize_adjacency(test::random_edges(n, 0.3, rng), n);
    const double alpha = 0.5;
    const auto p = ppr_closed_form(a, alpha);
    for (double v : p.data()) CHECK(v >= -1e-15);
    auto grid_a = test::to_grid(a);
    test::Grid power(n, std::vector<double>(n, 0.0)), series(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) power[i][i] = 1.0;
    double coef = alpha;
    for (int t = 0; t < 50; ++t) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) series[i][j] += coef * power[i][j];
      power = test::grid_mul(power, grid_a);
      coef *= 1 - alpha;
    }
    CHECK(test::grid_max_diff(series, p) < 1e-6);
  }

  TEST_CASE("knn examples") {
    CHECK(knn_sparsify(DenseMatrix{{0.7, 0.2, 0.1}}, 2) == DenseMatrix{{0.7, 0.2, 0.0}});
    CHECK(knn_sparsify(DenseMatrix{{0.5, 0.3, 0.3}}, 2) == DenseMatrix{{0.5, 0.3, 0.0}});
    const DenseMatrix m{{0.1, 0.9, 0.3}, {0.2, 0.2, 0.2}, {0.0, 0.5, 0.4}};
    CHECK(knn_sparsify(m, 3) == m);
    CHECK(knn_sparsify(m, 5) == m);
    CHECK(knn_sparsify(m, 1) == DenseMatrix{{0, 0.9, 0}, {0.2, 0, 0}, {0, 0.5, 0}});
  }

  TEST_CASE("knn row sparsity and idempotence") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 3 + rng.below(20);
      const std::size_t k = 1 + rng.below(n + 2);
      auto a = test::random_matrix(n, n, rng);
      for (auto& v : a.data()) v = std::abs(v);
      const auto once = knn_sparsify(a, k);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = once.row(i);
        CHECK(static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](double v) { return v != 0; })) <=
              std::min(k, n));
        for (std::size_t j = 0; j < n; ++j) CHECK((row[j] == 0.0 || row[j] == a(i, j)));
      }
      CHECK(knn_sparsify(once, k) == once);
    }
  }

  TEST_CASE("positional features") {
    ParamStore id;
    id.add("pe.W", DenseMatrix::identity(4));
    id.add("pe.b", DenseMatrix(1, 4));
    Tape t;
    ParamBinding b(t, id);
    CHECK(t.value(positional_features(b)) == DenseMatrix::identity(4));

    Rng rng(8);
    ParamStore bias_only;
    bias_only.add("pe.W", DenseMatrix(5, 3));
    bias_only.add("pe.b", test::random_matrix(1, 3, rng));
    ParamBinding b2(t, bias_only);
    const auto rows = t.value(positional_features(b2));
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(rows(i, j) == bias_only.value("pe.b")(0, j));

    ParamStore random;
    add_structure_params(random, 5, 3, 2, 2, rng);
    random.at("pe.b").value = test::random_matrix(1, 3, rng);
    ParamBinding b3(t, random);
    const auto x = t.value(positional_features(b3));
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(x(i, j) == doctest::Approx(random.value("pe.W")(i, j) + random.value("pe.b")(0, j)).epsilon(1e-15));
  }

  TEST_CASE("ppnp examples") {
    Rng rng(9);
    ParamStore store;
    add_structure_params(store, 3, 4, 3, 2, rng);
    const auto x = test::random_matrix(3, 4, rng);
    const auto perceptron = test::grid_mul(
        test::grid_relu(test::grid_mul(test::to_grid(x), test::to_grid(store.value("ppnp.W0")))),
        test::to_grid(store.value("ppnp.W1")));
    CHECK(test::grid_max_diff(perceptron, ppnp_value(store, DenseMatrix::identity(3), x)) < 1e-12);
    CHECK(ppnp_value(store, DenseMatrix::identity(3), DenseMatrix(3, 4)) == DenseMatrix(3, 2));

    const auto a = normalize_adjacency(test::path_edges(3), 3);
    const auto ga = test::to_grid(a);
    const auto expect = test::grid_mul(
        ga, test::grid_mul(test::grid_relu(test::grid_mul(ga, test::grid_mul(test::to_grid(x),
                                                                             test::to_grid(store.value("ppnp.W0"))))),
                           test::to_grid(store.value("ppnp.W1"))));
    CHECK(test::grid_max_diff(expect, ppnp_value(store, a, x)) < 1e-12);
  }

  TEST_CASE("ppnp is permutation equivariant") {
    Rng rng(10);
    const std::size_t n = 9;
    ParamStore store;
    add_structure_params(store, n, 5, 4, 3, rng);
    const auto a = knn_sparsify(ppr_closed_form(normalize_adjacency(test::random_edges(n, 0.3, rng), n), 0.2), 4);
    const auto x = test::random_matrix(n, 5, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    DenseMatrix pa(n, n), px(n, 5);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) pa(i, j) = a(perm[i], perm[j]);
      for (std::size_t j = 0; j < 5; ++j) px(i, j) = x(perm[i], j);
    }
    const auto z = ppnp_value(store, a, x);
    const auto pz = ppnp_value(store, pa, px);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(pz(i, j) == doctest::Approx(z(perm[i], j)).epsilon(1e-12));
  }

  TEST_CASE("structure path gradients") {
    Rng rng(11);
    const std::size_t n = 6;
    ParamStore store;
    add_structure_params(store, n, 4, 3, 2, rng);
    const auto graph = build_structure_graph(test::path_edges(n), n, {.alpha = 0.3, .k = 3});
    CHECK(graph.a_sr == knn_sparsify(graph.a_sr_dense, 3));
    CHECK(graph.a_sr_csr->to_dense() == graph.a_sr);
    const auto cmp = test::check_gradients(store, [&](ParamBinding& b) {
      auto& t = b.tape();
      return op::sum(t, op::tanh(t, ppnp_forward(b, graph.a_sr_csr, positional_features(b))));
    });
    CHECK(cmp.max_rel_error < 1e-4);
  }

  TEST_CASE("config validation") {
    CHECK_THROWS(PprConfig{.alpha = 0.0}.validate());
    CHECK_THROWS(PprConfig{.alpha = 1.5}.validate());
    CHECK_NOTHROW(PprConfig{}.validate());
  }
}
