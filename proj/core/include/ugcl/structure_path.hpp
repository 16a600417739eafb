#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "ugcl/graph/graph_dataset.hpp"
#include "ugcl/nn/tape.hpp"

namespace ugcl {

enum class PprMethod { kClosedForm, kPowerIteration };

struct PprConfig {
  double alpha = 0.1;           ///< reset probability
  std::size_t k = 20;           ///< neighbours kept per row; 0 disables sparsification
  PprMethod method = PprMethod::kClosedForm;
  double tol = 1e-8;
  std::size_t max_iter = 1000;

  void validate() const;
};

/// D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I.
nn::DenseMatrix normalize_adjacency(const std::vector<graph::Edge>& edges, std::size_t n);
nn::CsrMatrix normalize_adjacency_sparse(const std::vector<graph::Edge>& edges, std::size_t n);

/// alpha * (I - (1 - alpha) A_norm)^{-1}, solved by Cholesky factorization
/// (the system matrix is symmetric positive definite for a normalized
/// adjacency). Throws std::runtime_error if factorization breaks down.
nn::DenseMatrix ppr_closed_form(const nn::DenseMatrix& a_norm, double alpha);

struct PowerIterationResult {
  nn::DenseMatrix matrix;
  std::size_t iterations = 0;
  bool converged = false;
  double last_change = 0.0;
};

/// A_{t+1} = (1 - alpha) A_norm A_t + alpha I from A_0 = I, until the largest
/// entry change drops below `tol` or `max_iter` steps. Logs a warning and
/// returns the last iterate when the cap is hit.
PowerIterationResult ppr_power_iteration(const nn::DenseMatrix& a_norm, double alpha, double tol,
                                         std::size_t max_iter);

/// Keeps the k largest entries of each row (ties go to the smaller column
/// index) and zeroes the rest, without renormalizing. k == 0 or k >= n
/// returns the input; k > n also logs a warning.
nn::DenseMatrix knn_sparsify(const nn::DenseMatrix& a, std::size_t k);

/// The fixed propagation matrix of the structure path for one masked edge set.
struct StructureGraph {
  nn::DenseMatrix a_sr_dense;                 ///< PPR matrix before sparsification
  nn::DenseMatrix a_sr;                       ///< after top-k sparsification
  std::shared_ptr<const nn::CsrMatrix> a_sr_csr;
};

StructureGraph build_structure_graph(const std::vector<graph::Edge>& edges, std::size_t n,
                                     const PprConfig& config);

inline const std::string kPositionalPrefix = "pe";
inline const std::string kPpnpPrefix = "ppnp";

/// pe.W (n x pe_dim), pe.b (1 x pe_dim), ppnp.W0 (pe_dim x hidden),
/// ppnp.W1 (hidden x d). The propagation block has no biases.
void add_structure_params(nn::ParamStore& store, std::size_t n, std::size_t pe_dim, std::size_t hidden,
                          std::size_t d, Rng& rng);

/// One affine map applied to the n x n identity: row i is pe.W row i + pe.b.
nn::Var positional_features(nn::ParamBinding& params);

/// A ReLU(A X W0) W1, dropout after the ReLU.
nn::Var ppnp_forward(nn::ParamBinding& params, const std::shared_ptr<const nn::CsrMatrix>& a_sr,
                     nn::Var x_pe, const nn::ForwardMode& mode = {});

struct StructurePathOut {
  nn::DenseMatrix a_sr_dense;
  nn::DenseMatrix a_sr;
  nn::DenseMatrix x_pe;
  nn::DenseMatrix z_sr;
};

StructurePathOut run_structure_path(const StructureGraph& graph, const nn::ParamStore& params);

}  // namespace ugcl
