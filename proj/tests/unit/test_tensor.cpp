#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "helpers.hpp"
#include "ugcl/nn/checkpoint.hpp"
#include "ugcl/nn/csr_matrix.hpp"
#include "ugcl/nn/optimizer.hpp"

using namespace ugcl;
using namespace ugcl::nn;
using test::Grid;

namespace {

DenseMatrix random_sparse_pattern(std::size_t r, std::size_t c, Rng& rng) {
  DenseMatrix m(r, c);
  for (auto& v : m.data())
    if (rng.bernoulli(0.4)) v = rng.normal();
  return m;
}

/// sum(op(x) .* R) for a fixed random weighting R, so every output entry
/// reaches the loss with a distinct coefficient.
Var weighted_sum(Tape& t, Var out, std::uint64_t seed) {
  Rng rng(seed);
  const auto& v = t.value(out);
  return op::sum(t, op::mul(t, out, t.constant(test::random_matrix(v.rows(), v.cols(), rng))));
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("matmul kernels match loop oracles") {
    Rng rng(1);
    const auto a = test::random_matrix(4, 3, rng);
    const auto b = test::random_matrix(3, 5, rng);
    const auto c = test::random_matrix(5, 3, rng);
    CHECK(test::grid_max_diff(test::grid_mul(test::to_grid(a), test::to_grid(b)), matmul(a, b)) < 1e-12);
    CHECK(test::grid_max_diff(test::grid_mul(test::to_grid(a), test::to_grid(c.transposed())), matmul_nt(a, c)) <
          1e-12);
    CHECK(test::grid_max_diff(test::grid_mul(test::to_grid(a.transposed()), test::to_grid(a)), matmul_tn(a, a)) <
          1e-12);
    CHECK_THROWS_AS(matmul(a, a), ShapeError);
  }

  TEST_CASE("csr kernels agree with dense products") {
    Rng rng(2);
    const auto s = random_sparse_pattern(6, 4, rng);
    const auto csr = CsrMatrix::from_dense(s);
    CHECK(csr.to_dense() == s);
    CHECK(csr.transposed().to_dense() == s.transposed());
    const auto x = test::random_matrix(4, 3, rng);
    const auto y = test::random_matrix(6, 3, rng);
    const auto z = test::random_matrix(5, 4, rng);
    CHECK(max_abs_diff(spmm(csr, x), matmul(s, x)) < 1e-12);
    CHECK(max_abs_diff(spmm_t(csr, y), matmul_tn(s, y)) < 1e-12);
    CHECK(max_abs_diff(dense_times_sparse_t(z, csr), matmul_nt(z, s)) < 1e-12);
  }

  TEST_CASE("mlp2 identity layers pass nonnegative input through") {
    ParamStore store;
    store.add("m.l1.W", DenseMatrix::identity(3));
    store.add("m.l1.b", DenseMatrix(1, 3));
    store.add("m.l2.W", DenseMatrix::identity(3));
    store.add("m.l2.b", DenseMatrix(1, 3));
    const DenseMatrix x{{0.5, 1.0, 0.0}, {2.0, 0.25, 3.0}};
    CHECK(mlp2_forward(store, "m", x) == x);
    CHECK(mlp2_forward(store, "m", DenseMatrix(2, 3)) == DenseMatrix(2, 3));
  }

  TEST_CASE("mlp2 matches a by-hand matrix chain") {
    Rng rng(3);
    ParamStore store;
    add_mlp2(store, "m", 2, 4, 2, rng);
    store.at("m.l1.b").value = test::random_matrix(1, 4, rng);
    store.at("m.l2.b").value = test::random_matrix(1, 2, rng);
    const auto x = test::random_matrix(3, 2, rng);
    const Grid expect = test::grid_add_bias(
        test::grid_mul(test::grid_relu(test::grid_add_bias(test::grid_mul(test::to_grid(x),
                                                                          test::to_grid(store.value("m.l1.W"))),
                                                           test::to_grid(store.value("m.l1.b"))[0])),
                       test::to_grid(store.value("m.l2.W"))),
        test::to_grid(store.value("m.l2.b"))[0]);
    const auto out = mlp2_forward(store, "m", x);
    CHECK(out.all_finite());
    CHECK(test::grid_max_diff(expect, out) < 1e-12);
  }

  TEST_CASE("linear map gradient is X^T 1") {
    Rng rng(4);
    const auto x = test::random_matrix(5, 3, rng);
    ParamStore store;
    store.add("W", test::random_matrix(3, 2, rng));
    Tape t;
    ParamBinding b(t, store);
    t.backward(op::sum(t, op::matmul(t, t.constant(x), b("W"))));
    const DenseMatrix expect = matmul_tn(x, DenseMatrix(5, 2, 1.0));
    CHECK(max_abs_diff(store.at("W").grad, expect) < 1e-12);
  }

  TEST_CASE("unreachable parameter gets an exactly zero gradient") {
    Rng rng(5);
    ParamStore store;
    store.add("used", test::random_matrix(2, 2, rng));
    store.add("unused", test::random_matrix(2, 2, rng));
    Tape t;
    ParamBinding b(t, store);
    b("unused");
    t.backward(op::sum(t, op::tanh(t, b("used"))));
    for (double g : store.at("unused").grad.data()) CHECK(g == 0.0);
  }

  TEST_CASE("tape is single use") {
    Tape t;
    auto x = t.constant(DenseMatrix(1, 1, 2.0));
    t.backward(x);
    CHECK_THROWS_AS(t.backward(x), TapeError);
  }

  TEST_CASE("every op matches finite differences") {
    Rng rng(6);
    ParamStore store;
    store.add("a", test::random_matrix(4, 3, rng));
    store.add("b", test::random_matrix(4, 3, rng));
    store.add("c", test::random_matrix(3, 5, rng));
    store.add("bias", test::random_matrix(1, 3, rng));
    store.add("w", test::random_matrix(4, 1, rng));
    store.add("sq", test::random_matrix(4, 4, rng));
    auto s = std::make_shared<const CsrMatrix>(CsrMatrix::from_dense(random_sparse_pattern(5, 4, rng)));
    auto s3 = std::make_shared<const CsrMatrix>(CsrMatrix::from_dense(random_sparse_pattern(6, 3, rng)));
    std::vector<std::uint8_t> mask(12);
    for (auto& m : mask) m = rng.bernoulli(0.5);

    using Fn = std::function<Var(ParamBinding&)>;
    const std::vector<std::pair<const char*, Fn>> cases = {
        {"matmul", [](ParamBinding& p) { return op::matmul(p.tape(), p("a"), p("c")); }},
        {"matmul_nt", [](ParamBinding& p) { return op::matmul_nt(p.tape(), p("a"), p("b")); }},
        {"spmm", [&](ParamBinding& p) { return op::spmm(p.tape(), s, p("a")); }},
        {"matmul_sparse_t", [&](ParamBinding& p) { return op::matmul_sparse_t(p.tape(), p("a"), s3); }},
        {"add", [](ParamBinding& p) { return op::add(p.tape(), p("a"), p("b")); }},
        {"sub", [](ParamBinding& p) { return op::sub(p.tape(), p("a"), p("b")); }},
        {"mul", [](ParamBinding& p) { return op::mul(p.tape(), p("a"), p("b")); }},
        {"scale", [](ParamBinding& p) { return op::scale(p.tape(), p("a"), -1.7); }},
        {"add_row_bias", [](ParamBinding& p) { return op::add_row_bias(p.tape(), p("a"), p("bias")); }},
        {"row_scale", [](ParamBinding& p) { return op::row_scale(p.tape(), p("a"), p("w")); }},
        {"relu", [](ParamBinding& p) { return op::relu(p.tape(), p("a")); }},
        {"sigmoid", [](ParamBinding& p) { return op::sigmoid(p.tape(), p("a")); }},
        {"tanh", [](ParamBinding& p) { return op::tanh(p.tape(), p("a")); }},
        {"row_softmax", [](ParamBinding& p) { return op::row_softmax(p.tape(), p("a")); }},
        {"row_log_softmax", [](ParamBinding& p) { return op::row_log_softmax(p.tape(), p("a")); }},
        {"row_normalize", [](ParamBinding& p) { return op::row_normalize(p.tape(), p("a")); }},
        {"cosine_matrix", [](ParamBinding& p) { return op::cosine_matrix(p.tape(), p("a"), p("b")); }},
        {"trace", [](ParamBinding& p) { return op::trace(p.tape(), op::mul(p.tape(), p("sq"), p("sq"))); }},
        {"hconcat", [](ParamBinding& p) { return op::hconcat(p.tape(), p("a"), p("w")); }},
        {"column", [](ParamBinding& p) { return op::column(p.tape(), p("a"), 1); }},
        {"select", [&](ParamBinding& p) { return op::select(p.tape(), mask, p("a"), p("b")); }},
        {"dropout",
         [](ParamBinding& p) {
           Rng r(99);
           return op::dropout(p.tape(), p("a"), 0.5, r);
         }},
        {"softmax_cross_entropy",
         [](ParamBinding& p) {
           return op::softmax_cross_entropy(p.tape(), p("a"), {0, 2, 3}, {1, 0, 2});
         }},
    };
    for (const auto& [name, f] : cases) {
      CAPTURE(name);
      const auto cmp = test::check_gradients(store, [&](ParamBinding& p) {
        const Var out = f(p);
        return p.tape().value(out).size() == 1 ? out : weighted_sum(p.tape(), out, 17);
      });
      CAPTURE(cmp.worst_param);
      CHECK(cmp.max_rel_error < 1e-4);
      CHECK(cmp.ok);
    }
  }

  TEST_CASE("cosine matrix: examples, oracle and range") {
    Tape t;
    const DenseMatrix e{{1, 0}, {0, 1}};
    CHECK(t.value(op::cosine_matrix(t, t.constant(e), t.constant(e))) == e);

    Rng rng(7);
    const auto u = test::random_matrix(4, 3, rng);
    const auto v = test::random_matrix(4, 3, rng);
    const auto c = t.value(op::cosine_matrix(t, t.constant(u), t.constant(v)));
    const auto ug = test::to_grid(u), vg = test::to_grid(v);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(c(i, j) - test::cosine(ug[i], vg[j])) < 1e-12);

    auto unit = t.value(op::row_normalize(t, t.constant(u)));
    const auto self = t.value(op::cosine_matrix(t, t.constant(unit), t.constant(unit)));
    for (std::size_t i = 0; i < 4; ++i) CHECK(self(i, i) == doctest::Approx(1.0).epsilon(1e-14));

    for (int trial = 0; trial < 50; ++trial) {
      const auto a = test::random_matrix(6, 5, rng, std::pow(10.0, rng.uniform() * 8 - 4));
      const auto m = t.value(op::cosine_matrix(t, t.constant(a), t.constant(a)));
      for (double x : m.data()) CHECK((x >= -1 - 1e-12 && x <= 1 + 1e-12));
    }
  }

  TEST_CASE("softmax cross entropy of a uniform pair is ln 2") {
    Tape t;
    const auto l = op::softmax_cross_entropy(t, t.constant(DenseMatrix(1, 2)), {0}, {0});
    CHECK(t.scalar(l) == doctest::Approx(0.69314718056).epsilon(1e-10));
  }

  TEST_CASE("finite differences of simple functions") {
    ParamStore store;
    store.add("p", DenseMatrix(1, 1, 3.0));
    auto g = finite_diff_grad([](const ParamStore& s) { return std::pow(s.value("p")(0, 0), 2); }, store);
    CHECK(std::abs(g.at("p")(0, 0) - 6.0) < 1e-6);
    CHECK(store.value("p")(0, 0) == 3.0);
    g = finite_diff_grad([](const ParamStore&) { return 4.0; }, store);
    CHECK(g.at("p")(0, 0) == 0.0);
  }

  TEST_CASE("sgd step arithmetic") {
    ParamStore store;
    auto& p = store.add("p", DenseMatrix(1, 1, 1.0));
    p.grad(0, 0) = 0.5;
    Optimizer opt({.learning_rate = 0.1, .weight_decay = 0.0, .method = OptimMethod::kSgd});
    opt.step(store);
    CHECK(store.value("p")(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(store.at("p").grad(0, 0) == 0.0);
    opt.step(store);
    CHECK(store.value("p")(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
  }

  TEST_CASE("adam first step is about -lr") {
    ParamStore store;
    auto& p = store.add("p", DenseMatrix(2, 2, 0.0));
    p.grad.fill(1.0);
    const double lr = 0.01, eps = 1e-8;
    Optimizer opt({.learning_rate = lr, .weight_decay = 0.0, .method = OptimMethod::kAdam, .epsilon = eps});
    opt.step(store);
    // m_hat = 1, v_hat = 1 after bias correction.
    for (double v : store.value("p").data()) CHECK(v == doctest::Approx(-lr / (1.0 + eps)).epsilon(1e-12));
  }

  TEST_CASE("zero learning rate leaves parameters untouched") {
    Rng rng(8);
    for (auto method : {OptimMethod::kSgd, OptimMethod::kAdam}) {
      ParamStore store;
      auto& p = store.add("p", test::random_matrix(3, 3, rng));
      p.grad = test::random_matrix(3, 3, rng);
      const auto before = p.value;
      Optimizer opt({.learning_rate = 0.0, .weight_decay = 0.1, .method = method});
      opt.step(store);
      CHECK(store.value("p") == before);
    }
    CHECK_THROWS(OptimConfig{.learning_rate = 0.0}.validate());
  }

  TEST_CASE("non-finite update is rejected atomically") {
    ParamStore store;
    store.add("a", DenseMatrix(1, 1, 1.0)).grad(0, 0) = 1.0;
    store.add("b", DenseMatrix(1, 1, 1.0)).grad(0, 0) = INFINITY;
    Optimizer opt({.learning_rate = 0.1, .method = OptimMethod::kSgd});
    CHECK_THROWS_AS(opt.step(store), std::runtime_error);
    CHECK(store.value("a")(0, 0) == 1.0);
  }

  TEST_CASE("checkpoint round trip and corruption") {
    Rng rng(9);
    ParamStore store;
    store.add("x.W", test::random_matrix(3, 4, rng));
    store.add("y", test::random_matrix(1, 1, rng));
    const auto path = std::filesystem::temp_directory_path() / "ugcl_ckpt_test.bin";
    save_checkpoint(store, path);
    const auto loaded = load_checkpoint(path);
    CHECK(loaded.names() == store.names());
    for (const auto& name : store.names()) CHECK(loaded.value(name) == store.value(name));

    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 3);
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    std::ofstream(path, std::ios::binary) << "NOTACKPT";
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    std::filesystem::remove(path);
  }

  TEST_CASE("param store rejects duplicates and unknown names") {
    ParamStore store;
    store.add("a", DenseMatrix(1, 1));
    CHECK_THROWS(store.add("a", DenseMatrix(1, 1)));
    CHECK_THROWS(store.at("b"));
  }
}
