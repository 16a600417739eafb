#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ugcl/nn/dense_matrix.hpp"

namespace ugcl::nn {

/// Compressed sparse row matrix. Column indices within a row are ascending.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }

  /// Keeps every nonzero entry of `dense`.
  static CsrMatrix from_dense(const DenseMatrix& dense);
  DenseMatrix to_dense() const;
  CsrMatrix transposed() const;
};

/// s * x
DenseMatrix spmm(const CsrMatrix& s, const DenseMatrix& x);
/// s^T * x
DenseMatrix spmm_t(const CsrMatrix& s, const DenseMatrix& x);
/// x * s^T, i.e. out(i, j) = <x_i, s_j>.
DenseMatrix dense_times_sparse_t(const DenseMatrix& x, const CsrMatrix& s);

}  // namespace ugcl::nn
