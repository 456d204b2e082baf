#include "polynet/nn/matrix.hpp"

#include "polynet/error.hpp"
#include "polynet/nn/kernels.hpp"

#include <algorithm>

namespace polynet::nn {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::Dimension, "matmul_nt: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  kernels::active().gemm_nt(a.rows(), b.rows(), a.cols(), a.data(), b.data(), c.data(), false);
  return c;
}

Matrix matmul_nn(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::Dimension, "matmul_nn: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  kernels::active().gemm_nn(a.rows(), b.cols(), a.cols(), a.data(), b.data(), c.data(), false);
  return c;
}

void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    throw Error(ErrorCode::Dimension, "matmul_tn: shape mismatch");
  kernels::active().gemm_tn(a.cols(), b.cols(), a.rows(), a.data(), b.data(), c.data(), true);
}

}  // namespace polynet::nn
