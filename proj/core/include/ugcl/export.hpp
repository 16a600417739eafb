#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ugcl/fusion.hpp"
#include "ugcl/ugcl_trainer.hpp"

namespace ugcl {

/// Every exported file starts with "# config_digest=<hex> seed=<seed>".
struct RunTag {
  std::string config_digest;
  std::uint64_t seed = 0;
};

// Matrices are written with 12 significant digits, tab-separated, one line
// per node: "<node> <values...>".

/// Node id and fused features; with `include_views` the imputed features and
/// the structure-path representations follow on the same line.
void export_embeddings(const std::filesystem::path& path, const RunTag& tag, const FusionOut& fused,
                       const ReconState* views = nullptr);

/// Reads a node-indexed matrix file back (comment lines skipped, node column
/// dropped). Throws std::runtime_error on malformed input.
nn::DenseMatrix read_node_matrix(const std::filesystem::path& path);

/// "u v w" for every nonzero entry of the sparsified structure.
void export_structure(const std::filesystem::path& path, const RunTag& tag, const nn::DenseMatrix& a_sr);

/// "node w_feature w_structure".
void export_fusion_weights(const std::filesystem::path& path, const RunTag& tag, const nn::DenseMatrix& weights);

/// csv "epoch,L_F,L_S,total".
void export_loss_log(const std::filesystem::path& path, const RunTag& tag, const std::vector<EpochLoss>& history);

}  // namespace ugcl
