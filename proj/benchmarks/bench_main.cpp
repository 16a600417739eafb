#include <benchmark/benchmark.h>

#include <memory>

#include "ugcl/experiment_config.hpp"
#include "ugcl/graph/masking.hpp"
#include "ugcl/graph/sbm.hpp"
#include "ugcl/nn/csr_matrix.hpp"
#include "ugcl/rng.hpp"
#include "ugcl/structure_path.hpp"
#include "ugcl/ugcl_trainer.hpp"

namespace {

using namespace ugcl;

nn::DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  nn::DenseMatrix m(r, c);
  for (auto& v : m.data()) v = rng.normal();
  return m;
}

std::vector<graph::Edge> random_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<graph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.push_back(graph::make_edge(i, j));
  return edges;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nn::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * 64);
}
BENCHMARK(BM_Matmul)->Arg(128)->Arg(512);

void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = normalize_adjacency_sparse(random_graph(n, 8.0 / n, 3), n);
  const auto x = random_matrix(n, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(nn::spmm(s, x));
}
BENCHMARK(BM_Spmm)->Arg(512)->Arg(2048);

void BM_PprClosedForm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = normalize_adjacency(random_graph(n, 8.0 / n, 5), n);
  for (auto _ : state) benchmark::DoNotOptimize(ppr_closed_form(a, 0.1));
}
BENCHMARK(BM_PprClosedForm)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_PprPowerIteration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = normalize_adjacency(random_graph(n, 8.0 / n, 5), n);
  for (auto _ : state) benchmark::DoNotOptimize(ppr_power_iteration(a, 0.1, 1e-8, 1000));
}
BENCHMARK(BM_PprPowerIteration)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_UgclEpoch(benchmark::State& state) {
  ExperimentConfig cfg;
  const auto masked =
      graph::apply_mask(graph::generate_sbm(cfg.sbm.spec()), {0.3, 0.3, graph::FeatureMaskMode::kEntry, 0});
  UgclObjective objective(masked, cfg.ugcl.ppr, cfg.ugcl.contrastive.temperature);
  Rng rng(0);
  auto params = objective.init_params(cfg.ugcl.dims, rng);
  for (auto _ : state) {
    params.zero_grad();
    benchmark::DoNotOptimize(objective.loss_and_grad(params));
  }
}
BENCHMARK(BM_UgclEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
