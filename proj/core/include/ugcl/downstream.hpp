#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ugcl/fusion.hpp"
#include "ugcl/graph/graph_dataset.hpp"
#include "ugcl/graph/splits.hpp"
#include "ugcl/nn/optimizer.hpp"

namespace ugcl {

struct ReconState;

inline const std::string kGcnPrefix = "gcn";

/// gcn.Wa (d x hidden) and gcn.Wb (hidden x classes).
void add_gcn_params(nn::ParamStore& store, std::size_t d, std::size_t hidden, std::size_t classes, Rng& rng);

/// P ReLU(P X Wa) Wb, dropout after the ReLU.
nn::Var gcn_forward(nn::ParamBinding& params, const std::shared_ptr<const nn::CsrMatrix>& propagation,
                    nn::Var x, const nn::ForwardMode& mode = {});
nn::DenseMatrix gcn_forward(const nn::CsrMatrix& propagation, const nn::DenseMatrix& x,
                            const nn::ParamStore& params);

/// S = max(A, A^T), then D^{-1/2} S D^{-1/2} with D the row sums of S
/// (a zero row keeps degree 1).
nn::CsrMatrix symmetric_propagation(const nn::DenseMatrix& a_sr);

/// Per-node argmax; ties go to the smaller class index.
std::vector<int> predict(const nn::DenseMatrix& logits);

/// Fraction of `split` nodes whose prediction equals their label. Throws
/// std::invalid_argument on an empty split.
double evaluate(const nn::DenseMatrix& logits, const std::vector<int>& labels,
                const std::vector<graph::NodeId>& split);

/// Node ids paired with their labels. Training code only ever receives
/// these for the train and validation splits.
struct LabeledNodes {
  std::vector<std::uint32_t> nodes;
  std::vector<int> labels;
};

LabeledNodes labeled_subset(const graph::GraphDataset& ds, const std::vector<graph::NodeId>& split);

struct DownstreamConfig {
  std::size_t hidden = 64;
  std::size_t attention_dim = 64;
  nn::OptimConfig optim{.learning_rate = 0.01, .weight_decay = 5e-4};
  std::size_t max_epochs = 500;
  std::size_t patience = 100;
  double dropout = 0.5;

  void validate() const;
};

struct DownstreamInput {
  std::shared_ptr<const nn::CsrMatrix> propagation;
  nn::DenseMatrix x_fr;
  /// When present the classifier consumes attention_fuse(x_fr, z_sr) and the
  /// fusion parameters are trained jointly; otherwise it consumes x_fr.
  std::optional<nn::DenseMatrix> z_sr;
  LabeledNodes train;
  LabeledNodes val;
  int num_classes = 0;
};

struct DownstreamResult {
  nn::DenseMatrix best_logits;        ///< evaluation-mode logits at the selected epoch
  std::optional<FusionOut> fusion;    ///< fused features at the selected epoch
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::vector<double> loss_curve;     ///< training cross-entropy per epoch
};

/// Full-batch training with masked cross-entropy on the train nodes. The
/// checkpoint with the highest validation accuracy (ties: lower validation
/// loss) is kept; training stops after `patience` epochs without improvement.
DownstreamResult train_classifier(const DownstreamInput& input, const DownstreamConfig& config,
                                  std::uint64_t seed);

struct Metrics {
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> loss_curve;
  std::size_t best_epoch = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
};

struct ScoredRun {
  Metrics metrics;
  DownstreamResult result;
};

/// Fuses the reconstructed views, trains the classifier on the symmetrized
/// sparsified PPR graph, and scores the selected checkpoint on the test split.
ScoredRun train_downstream(const graph::GraphDataset& ds, const ReconState& recon, const graph::Splits& splits,
                           const DownstreamConfig& config, std::uint64_t seed);

/// The same classifier on the (masked) features as stored, zero-filled, over
/// the normalized (masked) input graph with self-loops. No fusion.
ScoredRun train_plain_gcn(const graph::GraphDataset& ds, const graph::Splits& splits,
                          const DownstreamConfig& config, std::uint64_t seed);

}  // namespace ugcl
