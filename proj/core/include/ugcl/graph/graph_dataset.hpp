#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ugcl/nn/dense_matrix.hpp"

namespace ugcl::graph {

using NodeId = std::uint32_t;

/// Undirected edge, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Orders the endpoints. Throws std::invalid_argument on a self-loop.
Edge make_edge(NodeId a, NodeId b);

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Node features with an observation mask, an undirected simple edge set,
/// and optional labels.
///
/// Unobserved feature entries are stored as 0; `feature_mask` (row-major,
/// 1 = observed) is the only carrier of observedness. Edges are kept sorted
/// and unique. `labels` is either empty or has one entry per node, with -1
/// marking an unlabeled node.
struct GraphDataset {
  std::size_t n = 0;
  std::size_t d = 0;
  nn::DenseMatrix features;
  std::vector<std::uint8_t> feature_mask;
  std::vector<Edge> edges;
  std::vector<int> labels;
  int num_classes = 0;

  bool observed(std::size_t node, std::size_t dim) const { return feature_mask[node * d + dim] != 0; }
  std::size_t observed_count() const;
  bool has_labels() const noexcept { return !labels.empty(); }
  std::size_t labeled_count() const;

  /// Checks every invariant; throws DatasetError describing the first breach.
  void validate() const;
};

/// Fully observed dataset from features and an arbitrary edge list
/// (endpoints normalized, then sorted; duplicates and self-loops rejected).
GraphDataset make_dataset(nn::DenseMatrix features, std::vector<Edge> edges,
                          std::vector<int> labels = {}, int num_classes = 0);

/// Dense 0/1 symmetric adjacency without self-loops.
nn::DenseMatrix adjacency_matrix(const std::vector<Edge>& edges, std::size_t n);

}  // namespace ugcl::graph
