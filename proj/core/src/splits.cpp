#include "ugcl/graph/splits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ugcl/rng.hpp"

namespace ugcl::graph {

Splits make_splits(const GraphDataset& ds, SplitRatios ratios, std::uint64_t seed) {
  if (!ds.has_labels()) throw std::invalid_argument("make_splits: dataset has no labels");
  if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0) ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw std::invalid_argument("make_splits: ratios must be positive and sum to 1");

  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i = 0; i < ds.n; ++i)
    if (ds.labels[i] >= 0) members[static_cast<std::size_t>(ds.labels[i])].push_back(static_cast<NodeId>(i));

  Rng rng = Rng::derive(seed, "splits");
  Splits out;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& nodes = members[c];
    const std::size_t m = nodes.size();
    if (m == 0) continue;
    if (m < 3)
      throw std::invalid_argument("make_splits: class " + std::to_string(c) + " has " + std::to_string(m) +
                                  " members, cannot stratify");
    rng.shuffle(std::span<NodeId>(nodes));
    auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ratios.train * static_cast<double>(m))));
    auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ratios.val * static_cast<double>(m))));
    while (n_train + n_val >= m) {
      if (n_train >= n_val && n_train > 1) --n_train;
      else --n_val;
    }
    out.train.insert(out.train.end(), nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.insert(out.val.end(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train),
                   nodes.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.insert(out.test.end(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), nodes.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace ugcl::graph
