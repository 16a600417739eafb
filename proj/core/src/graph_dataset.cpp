#include "ugcl/graph/graph_dataset.hpp"

#include <algorithm>
#include <numeric>

namespace ugcl::graph {

Edge make_edge(NodeId a, NodeId b) {
  if (a == b) throw std::invalid_argument("self-loop on node " + std::to_string(a));
  return a < b ? Edge{a, b} : Edge{b, a};
}

std::size_t GraphDataset::observed_count() const {
  return static_cast<std::size_t>(std::count(feature_mask.begin(), feature_mask.end(), std::uint8_t{1}));
}

std::size_t GraphDataset::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int c) { return c >= 0; }));
}

void GraphDataset::validate() const {
  if (features.rows() != n || features.cols() != d)
    throw DatasetError("features are " + nn::shape_string(features) + ", expected " +
                       std::to_string(n) + "x" + std::to_string(d));
  if (feature_mask.size() != n * d) throw DatasetError("feature mask length does not match n*d");
  for (std::size_t i = 0; i < feature_mask.size(); ++i) {
    if (feature_mask[i] > 1) throw DatasetError("feature mask entries must be 0 or 1");
    if (!feature_mask[i] && features.data()[i] != 0.0)
      throw DatasetError("unobserved feature entry " + std::to_string(i) + " is not stored as 0");
  }
  if (!features.all_finite()) throw DatasetError("features contain non-finite values");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (edge.u >= edge.v) throw DatasetError("edge " + std::to_string(e) + " is not ordered u < v");
    if (edge.v >= n) throw DatasetError("edge endpoint " + std::to_string(edge.v) + " out of range");
    if (e > 0 && !(edges[e - 1] < edge)) throw DatasetError("edges are not sorted and unique");
  }
  if (!labels.empty()) {
    if (labels.size() != n) throw DatasetError("labels length does not match n");
    for (int c : labels)
      if (c < -1 || c >= num_classes) throw DatasetError("label " + std::to_string(c) + " outside [0, C)");
  }
}

GraphDataset make_dataset(nn::DenseMatrix features, std::vector<Edge> edges, std::vector<int> labels,
                          int num_classes) {
  GraphDataset ds;
  ds.n = features.rows();
  ds.d = features.cols();
  ds.features = std::move(features);
  ds.feature_mask.assign(ds.n * ds.d, 1);
  for (Edge& e : edges) e = make_edge(e.u, e.v);
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw DatasetError("duplicate edge");
  ds.edges = std::move(edges);
  ds.labels = std::move(labels);
  if (!ds.labels.empty() && num_classes == 0)
    num_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  ds.num_classes = num_classes;
  ds.validate();
  return ds;
}

nn::DenseMatrix adjacency_matrix(const std::vector<Edge>& edges, std::size_t n) {
  nn::DenseMatrix a(n, n);
  for (const Edge& e : edges) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

}  // namespace ugcl::graph
