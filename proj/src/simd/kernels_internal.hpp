#pragma once

#include "embeval/simd/kernels.hpp"

namespace embeval::simd::detail {

const KernelTable& scalar_table();
#if defined(EMBEVAL_HAS_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(EMBEVAL_HAS_NEON)
const KernelTable& neon_table();
#endif

}  // namespace embeval::simd::detail
