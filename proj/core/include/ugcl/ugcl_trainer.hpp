#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ugcl/feature_path.hpp"
#include "ugcl/graph/graph_dataset.hpp"
#include "ugcl/nn/optimizer.hpp"
#include "ugcl/objective.hpp"
#include "ugcl/structure_path.hpp"

namespace ugcl {

struct ModelDims {
  std::size_t imputer_hidden = 128;
  std::size_t pe_dim = 512;
  std::size_t ppnp_hidden = 128;
  std::size_t gcn_hidden = 64;
  std::size_t attention_dim = 64;

  void validate() const;
};

/// Self-supervised reconstruction phase settings.
struct UgclConfig {
  PprConfig ppr;
  ContrastiveConfig contrastive;
  ModelDims dims;
  nn::OptimConfig optim{.learning_rate = 0.01, .weight_decay = 5e-4};
  std::size_t epochs = 200;
  double dropout = 0.0;

  void validate() const;
};

struct EpochLoss {
  std::size_t epoch = 0;
  double feature = 0.0;
  double structure = 0.0;
  double total = 0.0;
};

/// Everything the reconstruction phase produces.
struct ReconState {
  nn::DenseMatrix x_fr;        ///< imputed features
  nn::DenseMatrix a_fr;        ///< structure decoded from x_fr
  nn::DenseMatrix a_sr_dense;  ///< PPR matrix of the masked graph
  nn::DenseMatrix a_sr;        ///< top-k sparsified PPR matrix
  nn::DenseMatrix x_pe;        ///< positional features
  nn::DenseMatrix z_sr;        ///< structure-path representations, n x d
  std::shared_ptr<const nn::CsrMatrix> a_sr_csr;
  /// Training-mode loss before the update of each epoch.
  std::vector<EpochLoss> history;
  /// Evaluation-mode loss of the returned parameters.
  EpochLoss final_loss;
  nn::ParamStore params;
};

/// The dual contrastive objective bound to one masked dataset. The
/// structure-path propagation matrix is computed once at construction.
class UgclObjective {
 public:
  UgclObjective(const graph::GraphDataset& masked, const PprConfig& ppr, double temperature);

  nn::ParamStore init_params(const ModelDims& dims, Rng& rng) const;

  struct Recorded {
    nn::Var x_fr;
    nn::Var a_fr;
    nn::Var x_pe;
    nn::Var z_sr;
    LossVars loss;
  };

  Recorded record(nn::ParamBinding& params, const nn::ForwardMode& mode = {}) const;

  /// Evaluation-mode loss value.
  double loss(const nn::ParamStore& params) const;
  /// Evaluation-mode loss; accumulates its gradient into `params`.
  double loss_and_grad(nn::ParamStore& params) const;

  const StructureGraph& structure() const noexcept { return structure_; }
  double temperature() const noexcept { return temperature_; }

 private:
  nn::DenseMatrix features_;
  std::vector<std::uint8_t> mask_;
  StructureGraph structure_;
  std::shared_ptr<const nn::CsrMatrix> a_sr_unit_rows_;
  double temperature_;
};

/// Initializes every reconstruction parameter from `seed`, trains for
/// `config.epochs` epochs, and returns the reconstructions under the final
/// parameters. Throws std::runtime_error naming the epoch if the loss turns
/// non-finite.
ReconState run_ugcl(const graph::GraphDataset& masked, const UgclConfig& config, std::uint64_t seed);

}  // namespace ugcl
