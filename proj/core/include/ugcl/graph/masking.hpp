#pragma once

#include <cstddef>
#include <cstdint>

#include "ugcl/graph/graph_dataset.hpp"

namespace ugcl::graph {

enum class FeatureMaskMode {
  kEntry,  ///< individual feature attributes
  kRow,    ///< whole node feature rows
};

struct MaskSpec {
  double feature_missing_rate = 0.0;
  double edge_missing_rate = 0.0;
  FeatureMaskMode feature_mode = FeatureMaskMode::kEntry;
  std::uint64_t seed = 0;
};

/// ceil(rate * total), robust to the representation error of `rate`
/// (0.3 * 1000 counts as 300, not 301), clamped to [0, total].
std::size_t masked_count(double rate, std::size_t total);

/// Hides features and removes edges uniformly at random.
///
/// Entry mode hides ceil(rate * n * d) currently observed entries (all of them
/// if fewer remain); row mode hides ceil(rate * n) rows that still have an
/// observed entry. ceil(rate * |E|) edges are removed. Hidden entries are
/// zeroed. Candidates are shuffled by a seed-derived stream and a prefix is
/// taken, so for a fixed seed the hidden set at a lower rate is contained in
/// the hidden set at a higher rate. Throws std::invalid_argument if a rate is
/// outside [0, 1].
GraphDataset apply_mask(const GraphDataset& ds, const MaskSpec& spec);

}  // namespace ugcl::graph
