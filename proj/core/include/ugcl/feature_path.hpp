#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ugcl/nn/tape.hpp"

namespace ugcl {

inline const std::string kImputerPrefix = "imputer";

struct FeaturePathOut {
  nn::DenseMatrix x_fr;  ///< imputed features, n x d
  nn::DenseMatrix a_fr;  ///< decoded structure, n x n
};

/// Imputer parameters: a d -> hidden -> d two-layer perceptron under
/// kImputerPrefix.
void add_imputer_params(nn::ParamStore& store, std::size_t d, std::size_t hidden, Rng& rng);

/// Runs the imputer on the zero-filled feature matrix and keeps its output
/// only where `mask` (row-major, 1 = observed) is 0. Observed entries are
/// passed through bit-exactly and send no gradient into the imputer.
nn::Var impute_features(nn::ParamBinding& params, const nn::DenseMatrix& features,
                        const std::vector<std::uint8_t>& mask, const nn::ForwardMode& mode = {});

/// sigmoid(X X^T).
nn::Var decode_structure(nn::Tape& t, nn::Var x_fr);

FeaturePathOut run_feature_path(const nn::DenseMatrix& features, const std::vector<std::uint8_t>& mask,
                                const nn::ParamStore& params);

}  // namespace ugcl
