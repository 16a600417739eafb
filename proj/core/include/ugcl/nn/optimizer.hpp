#pragma once

#include <map>
#include <string>

#include "ugcl/nn/param_store.hpp"

namespace ugcl::nn {

enum class OptimMethod { kSgd, kAdam };

struct OptimConfig {
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  OptimMethod method = OptimMethod::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws std::invalid_argument unless learning_rate > 0 and the moment
  /// coefficients are in [0, 1).
  void validate() const;
};

/// Applies one update per call to every parameter in a store, then zeroes
/// the gradients. Weight decay is added to the gradient (L2 form) for both
/// methods. Adam moments are kept per parameter name.
class Optimizer {
 public:
  explicit Optimizer(OptimConfig config);

  /// Throws std::runtime_error, leaving values untouched, if any updated
  /// value would be non-finite.
  void step(ParamStore& params);

  std::size_t steps_taken() const noexcept { return steps_; }
  const OptimConfig& config() const noexcept { return config_; }

 private:
  struct Moments {
    DenseMatrix first;
    DenseMatrix second;
  };

  OptimConfig config_;
  std::map<std::string, Moments, std::less<>> moments_;
  std::size_t steps_ = 0;
};

}  // namespace ugcl::nn
