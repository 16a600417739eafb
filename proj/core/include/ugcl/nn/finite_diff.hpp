#pragma once

#include <functional>
#include <map>
#include <string>

#include "ugcl/nn/param_store.hpp"

namespace ugcl::nn {

using GradMap = std::map<std::string, DenseMatrix, std::less<>>;

/// Central differences (L(p + eps) - L(p - eps)) / (2 eps), one entry at a
/// time. `params` is perturbed in place and restored before returning.
/// Throws std::runtime_error if the loss is ever non-finite.
GradMap finite_diff_grad(const std::function<double(const ParamStore&)>& loss_fn,
                         ParamStore& params, double eps = 1e-5);

/// Snapshot of every gradient slot in `params`.
GradMap collect_grads(const ParamStore& params);

struct GradComparison {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_param;
  bool ok = true;
};

/// Relative error |a - n| / max(|a|, |n|) per entry; entries where both
/// magnitudes are below `small` are judged on absolute error against `abs_tol`.
GradComparison compare_grads(const GradMap& analytic, const GradMap& numeric,
                             double rel_tol, double abs_tol = 1e-7, double small = 1e-6);

}  // namespace ugcl::nn
