#pragma once

// Dense double-precision inner loops used by every numeric module.
//
// Each instruction set provides the same KernelTable. The scalar table is the
// reference; vector variants must agree with it to rounding (they reassociate
// sums, so results are not bit-identical across tables). One table is picked
// at first use from the CPU's capabilities; EMBEVAL_KERNELS=scalar|avx2|neon
// in the environment overrides the choice.

#include <cstddef>
#include <span>
#include <vector>

namespace embeval::simd {

struct KernelTable {
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
  // y = A x with A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

std::vector<const KernelTable*> available_kernels();

const KernelTable& active_kernels();
// Not thread-safe against concurrent kernel calls; meant for tests and benchmarks.
void set_active_kernels(const KernelTable& table);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active_kernels().dot(x.data(), y.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
  return active_kernels().squared_distance(x.data(), y.data(), x.size());
}

}  // namespace embeval::simd
