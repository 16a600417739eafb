#include "ugcl/nn/csr_matrix.hpp"

namespace ugcl::nn {

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& dense) {
  CsrMatrix out;
  out.rows = dense.rows();
  out.cols = dense.cols();
  out.row_ptr.reserve(out.rows + 1);
  for (std::size_t i = 0; i < dense.rows(); ++i) {
    for (std::size_t j = 0; j < dense.cols(); ++j) {
      const double v = dense(i, j);
      if (v != 0.0) {
        out.col_idx.push_back(static_cast<std::uint32_t>(j));
        out.values.push_back(v);
      }
    }
    out.row_ptr.push_back(out.values.size());
  }
  return out;
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) out(i, col_idx[p]) = values[p];
  return out;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (std::uint32_t c : col_idx) ++t.row_ptr[c + 1];
  for (std::size_t c = 0; c < cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      const std::size_t dst = cursor[col_idx[p]]++;
      t.col_idx[dst] = static_cast<std::uint32_t>(i);
      t.values[dst] = values[p];
    }
  }
  return t;
}

DenseMatrix spmm(const CsrMatrix& s, const DenseMatrix& x) {
  if (s.cols != x.rows())
    throw ShapeError("spmm: " + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                     " * " + shape_string(x));
  DenseMatrix out(s.rows, x.cols());
  for (std::size_t i = 0; i < s.rows; ++i) {
    auto out_row = out.row(i);
    for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
      const double w = s.values[p];
      auto x_row = x.row(s.col_idx[p]);
      for (std::size_t j = 0; j < out_row.size(); ++j) out_row[j] += w * x_row[j];
    }
  }
  return out;
}

DenseMatrix spmm_t(const CsrMatrix& s, const DenseMatrix& x) {
  if (s.rows != x.rows())
    throw ShapeError("spmm_t: (" + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                     ")^T * " + shape_string(x));
  DenseMatrix out(s.cols, x.cols());
  for (std::size_t i = 0; i < s.rows; ++i) {
    auto x_row = x.row(i);
    for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
      const double w = s.values[p];
      auto out_row = out.row(s.col_idx[p]);
      for (std::size_t j = 0; j < out_row.size(); ++j) out_row[j] += w * x_row[j];
    }
  }
  return out;
}

DenseMatrix dense_times_sparse_t(const DenseMatrix& x, const CsrMatrix& s) {
  if (x.cols() != s.cols)
    throw ShapeError("dense_times_sparse_t: " + shape_string(x) + " * (" +
                     std::to_string(s.rows) + "x" + std::to_string(s.cols) + ")^T");
  DenseMatrix out(x.rows(), s.rows);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto x_row = x.row(i);
    for (std::size_t j = 0; j < s.rows; ++j) {
      double acc = 0.0;
      for (std::size_t p = s.row_ptr[j]; p < s.row_ptr[j + 1]; ++p)
        acc += x_row[s.col_idx[p]] * s.values[p];
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace ugcl::nn
