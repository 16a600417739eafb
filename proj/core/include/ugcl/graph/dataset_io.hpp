#pragma once

#include <filesystem>

#include "ugcl/graph/graph_dataset.hpp"

namespace ugcl::graph {

// On-disk layout of a dataset directory (all ids 0-based, fields separated by
// tabs; blank lines and lines starting with '#' are ignored):
//
//   features.tsv   "<node> <x_0> ... <x_{d-1}>", one line per node
//   edges.tsv      "<u> <v>", one line per undirected edge (u < v expected;
//                  a reversed pair is accepted and normalized)
//   labels.tsv     optional, "<node> <class>"
//   mask.tsv       optional, "<node> <m_0> ... <m_{d-1}>" with m in {0, 1};
//                  absent means fully observed
//   meta.json      optional manifest {"n": .., "d": .., "num_classes": ..};
//                  checked against the data when present

/// Throws DatasetError with "file:line: reason" on malformed input,
/// out-of-range ids, self-loops or duplicate edges.
GraphDataset load_dataset(const std::filesystem::path& dir);

/// Writes all five files. Values are printed in shortest round-trip form, so
/// load_dataset(write_dataset(ds)) reproduces `ds` exactly.
void write_dataset(const GraphDataset& ds, const std::filesystem::path& dir);

}  // namespace ugcl::graph
