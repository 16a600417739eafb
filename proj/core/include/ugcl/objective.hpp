#pragma once

#include <memory>

#include "ugcl/nn/tape.hpp"

namespace ugcl {

struct ContrastiveConfig {
  double temperature = 0.5;

  void validate() const;
};

/// -sum_i log softmax_j(S_ij / t) evaluated at j = i. The positive pair of
/// row i is column i; every other column is a negative.
nn::Var info_nce(nn::Tape& t, nn::Var similarity, double temperature);

/// InfoNCE over cos(X_i, Z_j).
nn::Var feature_contrastive_loss(nn::Tape& t, nn::Var x_fr, nn::Var z_sr, double temperature);

/// InfoNCE over cos(A_i, S_j) with a dense structure view S.
nn::Var structure_contrastive_loss(nn::Tape& t, nn::Var a_fr, nn::Var a_sr, double temperature);

/// Same as above for a constant sparse S whose rows are already unit length
/// (see unit_rows).
nn::Var structure_contrastive_loss(nn::Tape& t, nn::Var a_fr,
                                   const std::shared_ptr<const nn::CsrMatrix>& a_sr_unit_rows,
                                   double temperature);

/// Rows scaled to unit Euclidean norm, norms floored like op::row_normalize.
nn::CsrMatrix unit_rows(const nn::CsrMatrix& m);

struct LossVars {
  nn::Var feature;
  nn::Var structure;
  nn::Var total;
};

LossVars total_loss(nn::Tape& t, nn::Var x_fr, nn::Var z_sr, nn::Var a_fr,
                    const std::shared_ptr<const nn::CsrMatrix>& a_sr_unit_rows, double temperature);

// Value-only conveniences.
double feature_contrastive_loss(const nn::DenseMatrix& x_fr, const nn::DenseMatrix& z_sr, double temperature);
double structure_contrastive_loss(const nn::DenseMatrix& a_fr, const nn::DenseMatrix& a_sr, double temperature);

}  // namespace ugcl
