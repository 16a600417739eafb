#include "ugcl/fusion.hpp"

namespace ugcl {

void add_fusion_params(nn::ParamStore& store, std::size_t d, std::size_t attention_dim, Rng& rng) {
  nn::add_affine(store, kFusionPrefix + ".proj_f", d, attention_dim, rng);
  nn::add_affine(store, kFusionPrefix + ".proj_s", d, attention_dim, rng);
  store.add(kFusionPrefix + ".score_f", nn::glorot_uniform(attention_dim, 1, rng));
  store.add(kFusionPrefix + ".score_s", nn::glorot_uniform(attention_dim, 1, rng));
}

namespace {

nn::Var view_score(nn::ParamBinding& params, nn::Var view, const std::string& proj, const std::string& score) {
  nn::Tape& t = params.tape();
  const nn::Var projected =
      nn::op::add_row_bias(t, nn::op::matmul(t, view, params(proj + ".W")), params(proj + ".b"));
  return nn::op::tanh(t, nn::op::matmul(t, projected, params(score)));
}

}  // namespace

FusionVars attention_fuse(nn::ParamBinding& params, nn::Var x_fr, nn::Var z_sr) {
  nn::Tape& t = params.tape();
  if (!t.value(x_fr).same_shape(t.value(z_sr)))
    throw nn::ShapeError("attention_fuse: " + nn::shape_string(t.value(x_fr)) + " vs " +
                         nn::shape_string(t.value(z_sr)));
  const nn::Var g_f = view_score(params, x_fr, kFusionPrefix + ".proj_f", kFusionPrefix + ".score_f");
  const nn::Var g_s = view_score(params, z_sr, kFusionPrefix + ".proj_s", kFusionPrefix + ".score_s");
  const nn::Var weights = nn::op::row_softmax(t, nn::op::hconcat(t, g_f, g_s));
  const nn::Var x_hat = nn::op::add(t, nn::op::row_scale(t, x_fr, nn::op::column(t, weights, 0)),
                                    nn::op::row_scale(t, z_sr, nn::op::column(t, weights, 1)));
  return {x_hat, weights};
}

FusionOut attention_fuse(const nn::DenseMatrix& x_fr, const nn::DenseMatrix& z_sr, const nn::ParamStore& params) {
  nn::Tape t;
  nn::ParamBinding bind(t, params);
  const FusionVars v = attention_fuse(bind, t.constant(x_fr), t.constant(z_sr));
  return {t.value(v.x_hat), t.value(v.weights)};
}

}  // namespace ugcl
