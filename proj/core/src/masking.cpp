#include "ugcl/graph/masking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ugcl/rng.hpp"

namespace ugcl::graph {

std::size_t masked_count(double rate, std::size_t total) {
  const double raw = rate * static_cast<double>(total);
  const double count = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  if (count <= 0.0) return 0;
  return std::min(total, static_cast<std::size_t>(count));
}

GraphDataset apply_mask(const GraphDataset& ds, const MaskSpec& spec) {
  auto check_rate = [](double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  };
  check_rate(spec.feature_missing_rate, "feature missing rate");
  check_rate(spec.edge_missing_rate, "edge missing rate");

  GraphDataset out = ds;

  Rng feature_rng = Rng::derive(spec.seed, "mask.features");
  if (spec.feature_mode == FeatureMaskMode::kEntry) {
    std::vector<std::size_t> candidates;
    candidates.reserve(ds.feature_mask.size());
    for (std::size_t i = 0; i < ds.feature_mask.size(); ++i)
      if (ds.feature_mask[i]) candidates.push_back(i);
    feature_rng.shuffle(std::span<std::size_t>(candidates));
    const std::size_t target = std::min(masked_count(spec.feature_missing_rate, ds.n * ds.d), candidates.size());
    for (std::size_t k = 0; k < target; ++k) {
      out.feature_mask[candidates[k]] = 0;
      out.features.data()[candidates[k]] = 0.0;
    }
  } else {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < ds.n; ++i) {
      for (std::size_t j = 0; j < ds.d; ++j) {
        if (ds.observed(i, j)) {
          candidates.push_back(i);
          break;
        }
      }
    }
    feature_rng.shuffle(std::span<std::size_t>(candidates));
    const std::size_t target = std::min(masked_count(spec.feature_missing_rate, ds.n), candidates.size());
    for (std::size_t k = 0; k < target; ++k) {
      const std::size_t row = candidates[k];
      for (std::size_t j = 0; j < ds.d; ++j) {
        out.feature_mask[row * ds.d + j] = 0;
        out.features(row, j) = 0.0;
      }
    }
  }

  Rng edge_rng = Rng::derive(spec.seed, "mask.edges");
  std::vector<std::size_t> order(ds.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  edge_rng.shuffle(std::span<std::size_t>(order));
  const std::size_t removed = masked_count(spec.edge_missing_rate, ds.edges.size());
  std::vector<bool> drop(ds.edges.size(), false);
  for (std::size_t k = 0; k < removed; ++k) drop[order[k]] = true;
  out.edges.clear();
  for (std::size_t e = 0; e < ds.edges.size(); ++e)
    if (!drop[e]) out.edges.push_back(ds.edges[e]);
  return out;
}

}  // namespace ugcl::graph
