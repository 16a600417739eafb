#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ugcl/nn/dense_matrix.hpp"

namespace ugcl {
class Rng;
}

namespace ugcl::nn {

struct Param {
  DenseMatrix value;
  DenseMatrix grad;
};

/// Named learnable matrices with paired gradient slots. Iteration order is
/// the lexicographic name order, which keeps optimizer updates and
/// checkpoints deterministic.
class ParamStore {
 public:
  /// Registers a new parameter with a zero gradient. Throws on duplicate names.
  Param& add(std::string name, DenseMatrix value);

  bool contains(std::string_view name) const;
  Param& at(std::string_view name);
  const Param& at(std::string_view name) const;
  const DenseMatrix& value(std::string_view name) const { return at(name).value; }

  void zero_grad();
  std::size_t size() const noexcept { return params_.size(); }
  std::vector<std::string> names() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Param, std::less<>> params_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
DenseMatrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Adds `prefix.W` (in x out, Glorot) and, if `with_bias`, `prefix.b` (1 x out, zeros).
void add_affine(ParamStore& store, const std::string& prefix, std::size_t in,
                std::size_t out, Rng& rng, bool with_bias = true);

}  // namespace ugcl::nn
