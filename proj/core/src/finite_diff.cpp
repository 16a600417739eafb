#include "ugcl/nn/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ugcl::nn {

GradMap finite_diff_grad(const std::function<double(const ParamStore&)>& loss_fn,
                         ParamStore& params, double eps) {
  GradMap out;
  auto checked = [&](const std::string& name) {
    const double v = loss_fn(params);
    if (!std::isfinite(v)) throw std::runtime_error("finite_diff_grad: non-finite loss while perturbing '" + name + "'");
    return v;
  };
  for (auto& [name, p] : params) {
    DenseMatrix g(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double& slot = p.value.data()[i];
      const double saved = slot;
      slot = saved + eps;
      const double up = checked(name);
      slot = saved - eps;
      const double down = checked(name);
      slot = saved;
      g.data()[i] = (up - down) / (2.0 * eps);
    }
    out.emplace(name, std::move(g));
  }
  return out;
}

GradMap collect_grads(const ParamStore& params) {
  GradMap out;
  for (const auto& [name, p] : params) out.emplace(name, p.grad);
  return out;
}

GradComparison compare_grads(const GradMap& analytic, const GradMap& numeric,
                             double rel_tol, double abs_tol, double small) {
  GradComparison result;
  for (const auto& [name, a] : analytic) {
    auto it = numeric.find(name);
    if (it == numeric.end() || !it->second.same_shape(a)) {
      result.ok = false;
      result.worst_param = name;
      continue;
    }
    const DenseMatrix& n = it->second;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double av = a.data()[i];
      const double nv = n.data()[i];
      const double abs_err = std::abs(av - nv);
      const double scale = std::max(std::abs(av), std::abs(nv));
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      if (scale < small) {
        if (abs_err >= abs_tol) {
          result.ok = false;
          result.worst_param = name;
        }
        continue;
      }
      const double rel = abs_err / scale;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = name;
      }
      if (rel >= rel_tol) result.ok = false;
    }
  }
  return result;
}

}  // namespace ugcl::nn
