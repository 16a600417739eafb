#pragma once

#include <cstddef>
#include <cstdint>

#include "ugcl/graph/graph_dataset.hpp"

namespace ugcl::graph {

struct SbmSpec {
  std::size_t nodes_per_block = 50;
  std::size_t blocks = 2;
  double p_in = 0.3;
  double p_out = 0.02;
  /// blocks x d; row b is the feature mean of block b.
  nn::DenseMatrix feature_means;
  double noise_sd = 0.5;
  std::uint64_t seed = 0;
};

/// Stochastic block model: every pair (i < j) is an edge with probability
/// p_in inside a block and p_out across blocks; node i of block b gets
/// features mean_b + noise_sd * N(0, I). Labels are block ids, nodes are
/// numbered block by block. Fully observed.
GraphDataset generate_sbm(const SbmSpec& spec);

}  // namespace ugcl::graph
