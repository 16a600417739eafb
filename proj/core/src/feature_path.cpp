#include "ugcl/feature_path.hpp"

namespace ugcl {

void add_imputer_params(nn::ParamStore& store, std::size_t d, std::size_t hidden, Rng& rng) {
  nn::add_mlp2(store, kImputerPrefix, d, hidden, d, rng);
}

nn::Var impute_features(nn::ParamBinding& params, const nn::DenseMatrix& features,
                        const std::vector<std::uint8_t>& mask, const nn::ForwardMode& mode) {
  if (mask.size() != features.size())
    throw nn::ShapeError("impute_features: mask length " + std::to_string(mask.size()) +
                         " does not match features " + nn::shape_string(features));
  nn::Tape& t = params.tape();
  const nn::Var observed = t.constant(features);
  // Every row goes through the network; the select keeps imputed values only
  // at unobserved positions.
  const nn::Var imputed = nn::mlp2_forward(params, kImputerPrefix, observed, mode);
  return nn::op::select(t, mask, observed, imputed);
}

nn::Var decode_structure(nn::Tape& t, nn::Var x_fr) {
  return nn::op::sigmoid(t, nn::op::matmul_nt(t, x_fr, x_fr));
}

FeaturePathOut run_feature_path(const nn::DenseMatrix& features, const std::vector<std::uint8_t>& mask,
                                const nn::ParamStore& params) {
  nn::Tape t;
  nn::ParamBinding bind(t, params);
  const nn::Var x_fr = impute_features(bind, features, mask);
  const nn::Var a_fr = decode_structure(t, x_fr);
  return {t.value(x_fr), t.value(a_fr)};
}

}  // namespace ugcl
