#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ugcl/downstream.hpp"
#include "ugcl/experiment_config.hpp"
#include "ugcl/fusion.hpp"
#include "ugcl/graph/graph_dataset.hpp"
#include "ugcl/ugcl_trainer.hpp"

namespace ugcl {

inline const std::string kMethodUgclGcn = "ugcl_gcn";
inline const std::string kMethodZeroFillGcn = "gcn_zero_fill";

struct MethodMetrics {
  std::string method;
  Metrics metrics;
};

/// Outcome of one (missing rate, seed) cell of a sweep.
struct CellResult {
  std::size_t rate_index = 0;
  double feature_rate = 0.0;
  double edge_rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<MethodMetrics> methods;
  /// Kept only when a dump was requested.
  std::optional<ReconState> recon;
  std::optional<FusionOut> fusion;
  /// Non-empty when the cell failed; `methods` then holds what finished.
  std::string error;

  bool ok() const noexcept { return error.empty(); }
  const Metrics* find(const std::string& method) const;
};

struct SummaryRow {
  double feature_rate = 0.0;
  double edge_rate = 0.0;
  std::string method;
  std::size_t runs = 0;
  double mean_test_accuracy = 0.0;
  double sd_test_accuracy = 0.0;  ///< sample standard deviation
};

struct ExperimentReport {
  std::string config_digest;
  std::vector<CellResult> cells;  ///< ordered by (rate index, seed order)
  std::vector<SummaryRow> summary;
  bool all_ok = true;
};

/// The configured dataset directory, or the synthetic fixture for "sbm".
graph::GraphDataset load_experiment_dataset(const ExperimentConfig& config);

/// mask -> split -> (reconstruct -> fuse + classify) and/or baseline, for
/// one cell. Never throws; failures are reported through CellResult::error.
CellResult run_cell(const graph::GraphDataset& base, const ExperimentConfig& config, std::size_t rate_index,
                    std::uint64_t seed, bool keep_artifacts = false);

/// Mean and sample sd of test accuracy per (rate, method), over successful cells.
std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<CellResult>& cells);

/// Runs the whole sweep on a bounded worker pool. When `write_files` is set,
/// results go to config.out_dir:
///   runs.csv           one row per (rate, seed, method); appended as cells
///                      finish, rewritten in sweep order at the end
///   summary.csv        mean / sd per (rate, method)
///   summary.json       the same plus the config echo and digest
///   ugcl_loss_*.csv    per-epoch loss components of each reconstruction
///   embeddings_*.tsv, fusion_weights_*.tsv, structure_*.tsv   on request
ExperimentReport run_experiment(const ExperimentConfig& config, bool write_files = true);

}  // namespace ugcl
