#include "ugcl/graph/sbm.hpp"

#include <stdexcept>
#include <vector>

#include "ugcl/rng.hpp"

namespace ugcl::graph {

GraphDataset generate_sbm(const SbmSpec& spec) {
  if (!(spec.p_in >= 0.0 && spec.p_in <= 1.0 && spec.p_out >= 0.0 && spec.p_out <= 1.0))
    throw std::invalid_argument("generate_sbm: probabilities must lie in [0, 1]");
  if (spec.noise_sd < 0.0) throw std::invalid_argument("generate_sbm: noise_sd must be non-negative");
  if (spec.feature_means.rows() != spec.blocks)
    throw std::invalid_argument("generate_sbm: feature_means needs one row per block");

  const std::size_t n = spec.nodes_per_block * spec.blocks;
  const std::size_t d = spec.feature_means.cols();
  Rng edge_rng = Rng::derive(spec.seed, "sbm.edges");
  Rng feature_rng = Rng::derive(spec.seed, "sbm.features");

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / spec.nodes_per_block);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? spec.p_in : spec.p_out;
      if (edge_rng.bernoulli(p)) edges.push_back(Edge{static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  }

  nn::DenseMatrix features(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto mean = spec.feature_means.row(static_cast<std::size_t>(labels[i]));
    for (std::size_t j = 0; j < d; ++j) features(i, j) = mean[j] + spec.noise_sd * feature_rng.normal();
  }
  return make_dataset(std::move(features), std::move(edges), std::move(labels),
                      static_cast<int>(spec.blocks));
}

}  // namespace ugcl::graph
