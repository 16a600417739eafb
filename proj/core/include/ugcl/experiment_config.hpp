#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ugcl/downstream.hpp"
#include "ugcl/graph/masking.hpp"
#include "ugcl/graph/sbm.hpp"
#include "ugcl/ugcl_trainer.hpp"

namespace ugcl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class BaselineMode {
  kOff,   ///< UGCL-GCN only
  kWith,  ///< UGCL-GCN and the zero-fill GCN baseline
  kOnly,  ///< baseline only, no reconstruction phase
};

/// Built-in synthetic dataset used when `dataset = sbm`: block b has mean
/// `mean_shift` on the dimensions j with j % blocks == b and 0 elsewhere.
struct SbmFixture {
  std::size_t nodes_per_block = 50;
  std::size_t blocks = 2;
  double p_in = 0.3;
  double p_out = 0.02;
  std::size_t dim = 16;
  double noise_sd = 0.5;
  double mean_shift = 0.1;
  std::uint64_t seed = 7;

  graph::SbmSpec spec() const;
};

struct ExperimentConfig {
  /// Dataset directory, or the literal "sbm" for the synthetic fixture.
  std::string dataset = "sbm";
  SbmFixture sbm;
  /// Paired index-wise with edge_missing_rates; an empty edge list reuses the
  /// feature rates.
  std::vector<double> feature_missing_rates{0.3};
  std::vector<double> edge_missing_rates;
  graph::FeatureMaskMode mask_mode = graph::FeatureMaskMode::kEntry;
  UgclConfig ugcl;
  DownstreamConfig downstream;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  BaselineMode baseline = BaselineMode::kWith;
  std::filesystem::path out_dir = "ugcl_out";
  bool dump_embeddings = false;
  bool dump_structure = false;
  /// 0 picks std::thread::hardware_concurrency().
  std::size_t workers = 0;

  /// (feature rate, edge rate) per sweep row.
  std::vector<std::pair<double, double>> rate_pairs() const;
  void validate() const;
};

/// Every recognised key, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value. Lists are comma-separated; seed
/// lists also accept "a-b" ranges. Throws ConfigError on an unknown key or an
/// unparsable value.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

std::string get_config_value(const ExperimentConfig& config, std::string_view key);

/// "key=value" lines; '#' starts a comment. Later lines override earlier ones.
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path);

/// All result-affecting keys as sorted "key=value" lines. Output-only keys
/// (out, dump_*, workers) are excluded so the digest names the computation.
std::string canonical_config(const ExperimentConfig& config);
/// 16 hex digits of FNV-1a over canonical_config.
std::string config_digest(const ExperimentConfig& config);

}  // namespace ugcl
