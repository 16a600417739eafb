#pragma once

#include <string>

#include "ugcl/nn/tape.hpp"

namespace ugcl {

inline const std::string kFusionPrefix = "fusion";

/// fusion.proj_f.{W,b} and fusion.proj_s.{W,b} (d x attention_dim), and the
/// scoring vectors fusion.score_f, fusion.score_s (attention_dim x 1).
void add_fusion_params(nn::ParamStore& store, std::size_t d, std::size_t attention_dim, Rng& rng);

struct FusionVars {
  nn::Var x_hat;    ///< n x d
  nn::Var weights;  ///< n x 2, column 0 weighs the feature view
};

struct FusionOut {
  nn::DenseMatrix x_hat;
  nn::DenseMatrix weights;
};

/// Per-node attention over two views of the same shape:
///   g_f(i) = tanh(<score_f, proj_f(x_i)>),  g_s(i) = tanh(<score_s, proj_s(z_i)>)
///   (w_f, w_s) = softmax(g_f(i), g_s(i)),   x_hat_i = w_f x_i + w_s z_i
FusionVars attention_fuse(nn::ParamBinding& params, nn::Var x_fr, nn::Var z_sr);
FusionOut attention_fuse(const nn::DenseMatrix& x_fr, const nn::DenseMatrix& z_sr, const nn::ParamStore& params);

}  // namespace ugcl
