#include "embeval/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "embeval/error.hpp"
#include "embeval/simd/kernels.hpp"

namespace embeval {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Matrix::reset(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, 0.0);
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw ArgumentError("append_row: width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

double norm(std::span<const double> x) { return std::sqrt(simd::dot(x, x)); }

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) throw ArgumentError("gemv: shape mismatch");
  simd::active_kernels().gemv(a.data(), a.rows(), a.cols(), x.data(), y.data());
}

void gemv_t_acc(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.rows() || y.size() != a.cols()) {
    throw ArgumentError("gemv_t_acc: shape mismatch");
  }
  const auto& k = simd::active_kernels();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (x[r] != 0.0) k.axpy(x[r], a.data() + r * a.cols(), y.data(), a.cols());
  }
}

void ger(double alpha, std::span<const double> x, std::span<const double> y, Matrix& a) {
  if (x.size() != a.rows() || y.size() != a.cols()) throw ArgumentError("ger: shape mismatch");
  const auto& k = simd::active_kernels();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (x[r] != 0.0) k.axpy(alpha * x[r], y.data(), a.data() + r * a.cols(), a.cols());
  }
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.cols()) throw ArgumentError("matmul_nt: inner dimension mismatch");
  c.reset(a.rows(), b.rows());
  const auto& k = simd::active_kernels();
  // Block over rows of B so a block stays cache resident across all rows of A.
  constexpr std::size_t kBlockBytes = 128 * 1024;
  const std::size_t block =
      std::max<std::size_t>(4, kBlockBytes / (sizeof(double) * std::max<std::size_t>(1, b.cols())));
  std::vector<double> tmp;
  for (std::size_t start = 0; start < b.rows(); start += block) {
    const std::size_t count = std::min(block, b.rows() - start);
    tmp.resize(count);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      k.gemv(b.data() + start * b.cols(), count, b.cols(), a.data() + i * a.cols(), tmp.data());
      std::copy(tmp.begin(), tmp.end(), c.data() + i * c.cols() + start);
    }
  }
}

void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols()) {
    throw ArgumentError("matmul_tn_acc: shape mismatch");
  }
  const auto& k = simd::active_kernels();
  for (std::size_t i = 0; i < a.cols(); ++i) {
    double* ci = c.data() + i * c.cols();
    for (std::size_t t = 0; t < a.rows(); ++t) {
      const double s = a(t, i);
      if (s != 0.0) k.axpy(s, b.data() + t * b.cols(), ci, c.cols());
    }
  }
}

void matmul_nn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols()) {
    throw ArgumentError("matmul_nn_acc: shape mismatch");
  }
  const auto& k = simd::active_kernels();
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double* bj = b.data() + j * b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double s = a(i, j);
      if (s != 0.0) k.axpy(s, bj, c.data() + i * c.cols(), c.cols());
    }
  }
}

}  // namespace embeval
