#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "ugcl/fusion.hpp"

using namespace ugcl;
using namespace ugcl::nn;

namespace {

ParamStore fusion_params(std::size_t d, std::size_t a, std::uint64_t seed) {
  Rng rng(seed);
  ParamStore store;
  add_fusion_params(store, d, a, rng);
  store.at("fusion.proj_f.b").value = test::random_matrix(1, a, rng);
  store.at("fusion.proj_s.b").value = test::random_matrix(1, a, rng);
  return store;
}

/// Per-node score tanh(<score, x W + b>), evaluated entry by entry.
double score_oracle(const ParamStore& p, const std::string& view, std::span<const double> x) {
  const auto& w = p.value("fusion.proj_" + view + ".W");
  const auto& b = p.value("fusion.proj_" + view + ".b");
  const auto& s = p.value("fusion.score_" + view);
  double g = 0.0;
  for (std::size_t k = 0; k < w.cols(); ++k) {
    double h = b(0, k);
    for (std::size_t j = 0; j < x.size(); ++j) h += x[j] * w(j, k);
    g += s(k, 0) * h;
  }
  return std::tanh(g);
}

}  // namespace

TEST_SUITE("fusion") {
  TEST_CASE("zero score vectors give equal weights and the midpoint") {
    auto p = fusion_params(3, 4, 1);
    p.at("fusion.score_f").value.fill(0.0);
    p.at("fusion.score_s").value.fill(0.0);
    Rng rng(2);
    const auto x = test::random_matrix(5, 3, rng), z = test::random_matrix(5, 3, rng);
    const auto out = attention_fuse(x, z, p);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(out.weights(i, 0) == 0.5);
      CHECK(out.weights(i, 1) == 0.5);
      for (std::size_t j = 0; j < 3; ++j) CHECK(out.x_hat(i, j) == doctest::Approx((x(i, j) + z(i, j)) / 2));
    }
  }

  TEST_CASE("equal views fuse to the same view") {
    const auto p = fusion_params(3, 4, 3);
    Rng rng(4);
    const auto x = test::random_matrix(6, 3, rng);
    CHECK(max_abs_diff(attention_fuse(x, x, p).x_hat, x) < 1e-14);
  }

  TEST_CASE("scores of +1 and -1 give e / (e + 1/e)") {
    // tanh(40) rounds to exactly 1.0 in double precision.
    ParamStore p;
    p.add("fusion.proj_f.W", DenseMatrix{{1.0}});
    p.add("fusion.proj_f.b", DenseMatrix{{0.0}});
    p.add("fusion.proj_s.W", DenseMatrix{{1.0}});
    p.add("fusion.proj_s.b", DenseMatrix{{0.0}});
    p.add("fusion.score_f", DenseMatrix{{1.0}});
    p.add("fusion.score_s", DenseMatrix{{1.0}});
    const DenseMatrix x{{40.0}}, z{{-40.0}};
    const auto out = attention_fuse(x, z, p);
    const double e = std::exp(1.0);
    CHECK(out.weights(0, 0) == doctest::Approx(e / (e + 1.0 / e)).epsilon(1e-12));
    CHECK(out.weights(0, 0) == doctest::Approx(0.88080).epsilon(1e-5));
  }

  TEST_CASE("weights match a per-node oracle") {
    const auto p = fusion_params(4, 3, 5);
    Rng rng(6);
    const auto x = test::random_matrix(7, 4, rng), z = test::random_matrix(7, 4, rng);
    const auto out = attention_fuse(x, z, p);
    for (std::size_t i = 0; i < 7; ++i) {
      const double gf = score_oracle(p, "f", x.row(i)), gs = score_oracle(p, "s", z.row(i));
      const double wf = std::exp(gf) / (std::exp(gf) + std::exp(gs));
      CHECK(out.weights(i, 0) == doctest::Approx(wf).epsilon(1e-12));
      for (std::size_t j = 0; j < 4; ++j)
        CHECK(out.x_hat(i, j) == doctest::Approx(wf * x(i, j) + (1 - wf) * z(i, j)).epsilon(1e-12));
    }
  }

  TEST_CASE("convexity and normalized, bounded weights") {
    const double lo = 1.0 / (1.0 + std::exp(2.0)), hi = 1.0 / (1.0 + std::exp(-2.0));
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = fusion_params(5, 6, 100 + trial);
      const auto x = test::random_matrix(9, 5, rng, 3.0), z = test::random_matrix(9, 5, rng, 3.0);
      const auto out = attention_fuse(x, z, p);
      for (std::size_t i = 0; i < 9; ++i) {
        CHECK(std::abs(out.weights(i, 0) + out.weights(i, 1) - 1.0) < 1e-12);
        for (std::size_t c = 0; c < 2; ++c) CHECK((out.weights(i, c) > lo && out.weights(i, c) < hi));
        for (std::size_t j = 0; j < 5; ++j) {
          CHECK(out.x_hat(i, j) >= std::min(x(i, j), z(i, j)) - 1e-12);
          CHECK(out.x_hat(i, j) <= std::max(x(i, j), z(i, j)) + 1e-12);
        }
      }
    }
  }

  TEST_CASE("swapping views and their parameters leaves the output unchanged") {
    const auto p = fusion_params(3, 4, 8);
    ParamStore swapped;
    for (const auto& [name, param] : p) {
      std::string other = name;
      if (auto k = other.find("_f"); k != std::string::npos)
        other.replace(k, 2, "_s");
      else if (auto k2 = other.find("_s"); k2 != std::string::npos)
        other.replace(k2, 2, "_f");
      swapped.add(other, param.value);
    }
    Rng rng(9);
    const auto x = test::random_matrix(6, 3, rng), z = test::random_matrix(6, 3, rng);
    const auto a = attention_fuse(x, z, p);
    const auto b = attention_fuse(z, x, swapped);
    CHECK(max_abs_diff(a.x_hat, b.x_hat) < 1e-14);
  }

  TEST_CASE("gradients reach all fusion parameters") {
    auto p = fusion_params(3, 4, 10);
    Rng rng(11);
    p.add("x", test::random_matrix(5, 3, rng));
    p.add("z", test::random_matrix(5, 3, rng));
    const auto w = test::random_matrix(5, 3, rng);
    const auto cmp = test::check_gradients(p, [&](ParamBinding& b) {
      auto& t = b.tape();
      const auto fused = attention_fuse(b, b("x"), b("z"));
      return op::sum(t, op::mul(t, fused.x_hat, t.constant(w)));
    });
    CHECK(cmp.max_rel_error < 1e-4);
    for (const char* name : {"fusion.proj_f.W", "fusion.proj_f.b", "fusion.proj_s.W", "fusion.proj_s.b",
                             "fusion.score_f", "fusion.score_s"}) {
      CAPTURE(name);
      double total = 0.0;
      for (double g : p.at(name).grad.data()) total += std::abs(g);
      CHECK(total > 0.0);
    }
  }
}
