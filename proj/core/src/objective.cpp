#include "ugcl/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ugcl {

void ContrastiveConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw std::invalid_argument("temperature must be positive");
}

nn::Var info_nce(nn::Tape& t, nn::Var similarity, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("info_nce: temperature must be positive");
  if (!t.value(similarity).all_finite()) throw std::runtime_error("info_nce: non-finite similarity");
  const nn::Var log_probs = nn::op::row_log_softmax(t, nn::op::scale(t, similarity, 1.0 / temperature));
  return nn::op::scale(t, nn::op::trace(t, log_probs), -1.0);
}

nn::Var feature_contrastive_loss(nn::Tape& t, nn::Var x_fr, nn::Var z_sr, double temperature) {
  if (!t.value(x_fr).same_shape(t.value(z_sr)))
    throw nn::ShapeError("feature_contrastive_loss: " + nn::shape_string(t.value(x_fr)) + " vs " +
                         nn::shape_string(t.value(z_sr)));
  return info_nce(t, nn::op::cosine_matrix(t, x_fr, z_sr), temperature);
}

nn::Var structure_contrastive_loss(nn::Tape& t, nn::Var a_fr, nn::Var a_sr, double temperature) {
  if (!t.value(a_fr).same_shape(t.value(a_sr)))
    throw nn::ShapeError("structure_contrastive_loss: " + nn::shape_string(t.value(a_fr)) + " vs " +
                         nn::shape_string(t.value(a_sr)));
  return info_nce(t, nn::op::cosine_matrix(t, a_fr, a_sr), temperature);
}

nn::Var structure_contrastive_loss(nn::Tape& t, nn::Var a_fr,
                                   const std::shared_ptr<const nn::CsrMatrix>& a_sr_unit_rows,
                                   double temperature) {
  const nn::Var similarity = nn::op::matmul_sparse_t(t, nn::op::row_normalize(t, a_fr), a_sr_unit_rows);
  return info_nce(t, similarity, temperature);
}

nn::CsrMatrix unit_rows(const nn::CsrMatrix& m) {
  nn::CsrMatrix out = m;
  for (std::size_t i = 0; i < out.rows; ++i) {
    double sq = 0.0;
    for (std::size_t p = out.row_ptr[i]; p < out.row_ptr[i + 1]; ++p) sq += out.values[p] * out.values[p];
    const double denom = std::max(std::sqrt(sq), nn::op::kNormFloor);
    for (std::size_t p = out.row_ptr[i]; p < out.row_ptr[i + 1]; ++p) out.values[p] /= denom;
  }
  return out;
}

LossVars total_loss(nn::Tape& t, nn::Var x_fr, nn::Var z_sr, nn::Var a_fr,
                    const std::shared_ptr<const nn::CsrMatrix>& a_sr_unit_rows, double temperature) {
  LossVars out;
  out.feature = feature_contrastive_loss(t, x_fr, z_sr, temperature);
  out.structure = structure_contrastive_loss(t, a_fr, a_sr_unit_rows, temperature);
  out.total = nn::op::add(t, out.feature, out.structure);
  return out;
}

double feature_contrastive_loss(const nn::DenseMatrix& x_fr, const nn::DenseMatrix& z_sr, double temperature) {
  nn::Tape t;
  return t.scalar(feature_contrastive_loss(t, t.constant(x_fr), t.constant(z_sr), temperature));
}

double structure_contrastive_loss(const nn::DenseMatrix& a_fr, const nn::DenseMatrix& a_sr, double temperature) {
  nn::Tape t;
  return t.scalar(structure_contrastive_loss(t, t.constant(a_fr), t.constant(a_sr), temperature));
}

}  // namespace ugcl
