#include <atomic>
#include <cstdlib>
#include <string_view>

#include "embeval/error.hpp"
#include "kernels_internal.hpp"

namespace embeval::simd {
namespace {

bool cpu_has_avx2() {
#if defined(EMBEVAL_HAS_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& pick_default() {
  const KernelTable* best = &scalar_kernels();
  if (const KernelTable* t = neon_kernels()) best = t;
  if (const KernelTable* t = avx2_kernels()) best = t;
  if (const char* env = std::getenv("EMBEVAL_KERNELS")) {
    const std::string_view wanted(env);
    for (const KernelTable* t : available_kernels()) {
      if (wanted == t->name) return *t;
    }
    warn("EMBEVAL_KERNELS=" + std::string(wanted) + " is not available; using " + best->name);
  }
  return *best;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&pick_default()};
  return slot;
}

}  // namespace

const KernelTable& scalar_kernels() { return detail::scalar_table(); }

const KernelTable* avx2_kernels() {
#if defined(EMBEVAL_HAS_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(EMBEVAL_HAS_NEON)
  return &detail::neon_table();
#else
  return nullptr;
#endif
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
  if (const KernelTable* t = avx2_kernels()) out.push_back(t);
  if (const KernelTable* t = neon_kernels()) out.push_back(t);
  return out;
}

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_relaxed); }

void set_active_kernels(const KernelTable& table) {
  active_slot().store(&table, std::memory_order_relaxed);
}

}  // namespace embeval::simd
