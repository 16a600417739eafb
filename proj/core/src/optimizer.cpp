#include "ugcl/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace ugcl::nn {

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be positive");
  if (weight_decay < 0.0) throw std::invalid_argument("weight decay must be non-negative");
  if (method == OptimMethod::kAdam) {
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
      throw std::invalid_argument("adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be positive");
  }
}

Optimizer::Optimizer(OptimConfig config) : config_(config) {
  if (config_.learning_rate < 0.0) throw std::invalid_argument("learning rate must be non-negative");
}

void Optimizer::step(ParamStore& params) {
  const std::size_t t = steps_ + 1;
  std::map<std::string, DenseMatrix, std::less<>> updated;

  for (auto& [name, p] : params) {
    DenseMatrix next = p.value;
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto out = next.data();

    if (config_.method == OptimMethod::kSgd) {
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = value[i] - config_.learning_rate * (grad[i] + config_.weight_decay * value[i]);
    } else {
      auto [it, fresh] = moments_.try_emplace(name);
      Moments& mom = it->second;
      if (fresh || !mom.first.same_shape(p.value)) {
        mom.first = DenseMatrix(p.value.rows(), p.value.cols());
        mom.second = DenseMatrix(p.value.rows(), p.value.cols());
      }
      const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));
      auto m = mom.first.data();
      auto v = mom.second.data();
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double g = grad[i] + config_.weight_decay * value[i];
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        out[i] = value[i] - config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      }
    }
    if (!next.all_finite()) throw std::runtime_error("optimizer: non-finite update for '" + name + "'");
    updated.emplace(name, std::move(next));
  }

  for (auto& [name, p] : params) {
    p.value = std::move(updated.at(name));
    p.grad.fill(0.0);
  }
  ++steps_;
}

}  // namespace ugcl::nn
