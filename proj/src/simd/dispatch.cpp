#include <atomic>
#include <cstdlib>
#include <string>

#include "optimist/errors.hpp"
#include "optimist/simd/kernels.hpp"

namespace optimist::simd {

#if defined(OPTIMIST_HAVE_AVX2)
const KernelTable* avx2_kernels_compiled();
#endif

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() {
#if defined(OPTIMIST_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? avx2_kernels_compiled() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("OPTIMIST_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2" && avx2_kernels() != nullptr) return avx2_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

void select(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      slot().store(&scalar_kernels());
      return;
    case Isa::Avx2:
      if (const KernelTable* t = avx2_kernels()) {
        slot().store(t);
        return;
      }
      throw InputError("avx2 kernels unavailable on this build or CPU");
  }
}

}  // namespace optimist::simd
