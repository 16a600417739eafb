#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ugcl/feature_path.hpp"

using namespace ugcl;
using namespace ugcl::nn;

namespace {

std::vector<std::uint8_t> random_mask(std::size_t size, double p_observed, Rng& rng) {
  std::vector<std::uint8_t> m(size);
  for (auto& v : m) v = rng.bernoulli(p_observed);
  return m;
}

DenseMatrix zero_filled(DenseMatrix x, const std::vector<std::uint8_t>& mask) {
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (!mask[k]) x.data()[k] = 0.0;
  return x;
}

}  // namespace

TEST_SUITE("feature_path") {
  TEST_CASE("fully observed features pass through for any parameters") {
    Rng rng(1);
    ParamStore store;
    add_imputer_params(store, 4, 8, rng);
    const auto x = test::random_matrix(5, 4, rng);
    const auto out = run_feature_path(x, std::vector<std::uint8_t>(20, 1), store);
    CHECK(out.x_fr == x);
  }

  TEST_CASE("identity imputer fills a missing entry with the zero fill") {
    ParamStore store;
    store.add("imputer.l1.W", DenseMatrix::identity(3));
    store.add("imputer.l1.b", DenseMatrix(1, 3));
    store.add("imputer.l2.W", DenseMatrix::identity(3));
    store.add("imputer.l2.b", DenseMatrix(1, 3));
    const DenseMatrix x{{1, 2, 3}, {4, 0, 6}};
    std::vector<std::uint8_t> mask(6, 1);
    mask[4] = 0;
    const auto out = run_feature_path(x, mask, store);
    CHECK(out.x_fr == x);
  }

  TEST_CASE("observed entries are bit-exact, missing ones match a loop re-evaluation") {
    Rng rng(2);
    ParamStore store;
    add_imputer_params(store, 3, 5, rng);
    store.at("imputer.l1.b").value = test::random_matrix(1, 5, rng);
    store.at("imputer.l2.b").value = test::random_matrix(1, 3, rng);
    std::vector<std::uint8_t> mask(12, 1);
    mask[1] = 0;
    mask[10] = 0;
    const auto x = zero_filled(test::random_matrix(4, 3, rng), mask);
    const auto out = run_feature_path(x, mask, store);

    const auto hidden = test::grid_relu(test::grid_add_bias(
        test::grid_mul(test::to_grid(x), test::to_grid(store.value("imputer.l1.W"))),
        test::to_grid(store.value("imputer.l1.b"))[0]));
    const auto f = test::grid_add_bias(test::grid_mul(hidden, test::to_grid(store.value("imputer.l2.W"))),
                                       test::to_grid(store.value("imputer.l2.b"))[0]);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        if (mask[i * 3 + j])
          CHECK(out.x_fr(i, j) == x(i, j));
        else
          CHECK(out.x_fr(i, j) == doctest::Approx(f[i][j]).epsilon(1e-12));
      }
  }

  TEST_CASE("observed-entry preservation over random parameters and masks") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      ParamStore store;
      add_imputer_params(store, 6, 7, rng);
      const auto mask = random_mask(60, 0.6, rng);
      const auto x = zero_filled(test::random_matrix(10, 6, rng, 3.0), mask);
      const auto out = run_feature_path(x, mask, store);
      for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) CHECK(out.x_fr.data()[k] == x.data()[k]);
    }
  }

  TEST_CASE("decoder examples") {
    Tape t;
    auto zero = t.value(decode_structure(t, t.constant(DenseMatrix(3, 2))));
    for (double v : zero.data()) CHECK(v == 0.5);
    const auto a = t.value(decode_structure(t, t.constant(DenseMatrix{{1, 0}, {0, 1}})));
    const double s1 = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(a(0, 0) == doctest::Approx(0.73106).epsilon(1e-5));
    CHECK(a(0, 0) == doctest::Approx(s1).epsilon(1e-15));
    CHECK(a(0, 1) == 0.5);
    CHECK(a(1, 0) == 0.5);
  }

  TEST_CASE("decoded structure is symmetric and inside the open unit interval") {
    Rng rng(4);
    Tape t;
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = t.value(decode_structure(t, t.constant(test::random_matrix(7, 3, rng, 0.8))));
      for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) {
          CHECK(a(i, j) == a(j, i));
          CHECK((a(i, j) > 0.0 && a(i, j) < 1.0));
        }
    }
  }

  TEST_CASE("observed entries send no gradient into the imputer") {
    Rng rng(5);
    ParamStore store;
    add_imputer_params(store, 3, 4, rng);
    const auto x = test::random_matrix(4, 3, rng);
    {
      Tape t;
      ParamBinding b(t, store);
      t.backward(op::sum(t, op::mul(t, impute_features(b, x, std::vector<std::uint8_t>(12, 1)),
                                    t.constant(test::random_matrix(4, 3, rng)))));
    }
    for (const auto& [name, p] : store)
      for (double g : p.grad.data()) CHECK(g == 0.0);

    std::vector<std::uint8_t> mask(12, 1);
    mask[5] = 0;
    const auto xz = zero_filled(x, mask);
    const auto cmp = test::check_gradients(store, [&](ParamBinding& b) {
      auto& t = b.tape();
      return op::sum(t, decode_structure(t, impute_features(b, xz, mask)));
    });
    CHECK(cmp.max_rel_error < 1e-4);
    double total = 0.0;
    for (double g : store.at("imputer.l2.W").grad.data()) total += std::abs(g);
    CHECK(total > 0.0);
  }
}
