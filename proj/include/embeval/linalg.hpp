#pragma once

// Row-major dense matrix plus the handful of BLAS-like loops the models need.
// All loops route through the active simd::KernelTable.

#include <cstddef>
#include <span>
#include <vector>

namespace embeval {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v);
  // Reshapes and zero-fills.
  void reset(std::size_t rows, std::size_t cols);
  void append_row(std::span<const double> values);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double norm(std::span<const double> x);

// y = A x
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y);
// y += A^T x
void gemv_t_acc(const Matrix& a, std::span<const double> x, std::span<double> y);
// A += alpha * x y^T
void ger(double alpha, std::span<const double> x, std::span<const double> y, Matrix& a);
// C = A B^T, with A m x k and B n x k. C is resized.
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);
// C += A^T B, with A k x m and B k x n.
void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c);
// C += A B, with A m x k and B k x n.
void matmul_nn_acc(const Matrix& a, const Matrix& b, Matrix& c);

}  // namespace embeval
