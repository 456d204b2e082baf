#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace polynet::nn {

/// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  void fill(double v);
  bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

  static Matrix identity(std::size_t n);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B^T  (A: m x k, B: n x k)
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A * B    (A: m x k, B: k x n)
Matrix matmul_nn(const Matrix& a, const Matrix& b);
// C (+)= A^T * B  (A: k x m, B: k x n)
void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& c);

/// A trainable tensor and its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, std::size_t rows, std::size_t cols, double fill = 0.0)
      : name(std::move(n)), value(rows, cols, fill), grad(rows, cols, 0.0) {}
  void zero_grad() { grad.fill(0.0); }
};

}  // namespace polynet::nn
