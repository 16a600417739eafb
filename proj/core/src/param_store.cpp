#include "ugcl/nn/param_store.hpp"

#include <cmath>
#include <stdexcept>

#include "ugcl/rng.hpp"

namespace ugcl::nn {

Param& ParamStore::add(std::string name, DenseMatrix value) {
  if (params_.contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  DenseMatrix grad(value.rows(), value.cols());
  auto [it, inserted] = params_.emplace(std::move(name), Param{std::move(value), std::move(grad)});
  return it->second;
}

bool ParamStore::contains(std::string_view name) const { return params_.find(name) != params_.end(); }

Param& ParamStore::at(std::string_view name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

const Param& ParamStore::at(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

DenseMatrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  DenseMatrix m(fan_in, fan_out);
  for (double& v : m.data()) v = (2.0 * rng.uniform() - 1.0) * limit;
  return m;
}

void add_affine(ParamStore& store, const std::string& prefix, std::size_t in,
                std::size_t out, Rng& rng, bool with_bias) {
  store.add(prefix + ".W", glorot_uniform(in, out, rng));
  if (with_bias) store.add(prefix + ".b", DenseMatrix(1, out));
}

}  // namespace ugcl::nn
