#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ugcl/graph/graph_dataset.hpp"

namespace ugcl::graph {

/// Disjoint node-id sets, each sorted ascending.
struct Splits {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

/// Per-class stratified partition of the labeled nodes.
///
/// For a class with m members: train gets round(train * m), val gets
/// round(val * m), test the remainder, with each part forced to hold at least
/// one node. Throws std::invalid_argument without labels, for ratios that are
/// not positive or do not sum to 1, or if a class has fewer than 3 members.
Splits make_splits(const GraphDataset& ds, SplitRatios ratios, std::uint64_t seed);

}  // namespace ugcl::graph
