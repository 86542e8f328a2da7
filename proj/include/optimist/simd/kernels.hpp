#pragma once

// Data-parallel inner loops used by the policy, estimators and verifier.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 variant. The variant is chosen once at startup from
// the CPU's feature bits; OPTIMIST_SIMD=scalar|avx2 in the environment
// overrides the choice.
//
// Elementwise kernels (radius_table, optimistic_argmax, first_exceedance,
// rank_one_update) are bit-identical across variants: they perform the
// same correctly-rounded IEEE operations in the same order. Reductions
// (dot, matvec) reassociate and agree only to rounding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace optimist::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // out[j] = sqrt(a / m) + b / m with m = m_first + j.
  void (*radius_table)(double a, double b, std::uint64_t m_first, std::size_t n, double* out);
  // index[j] = (est[j] + rad[j]) + xi[j]; returns the lowest j attaining the
  // maximum, or n if any index is not finite.
  std::size_t (*optimistic_argmax)(const double* est, const double* rad, const double* xi,
                                   std::size_t n, double* index);
  // Lowest j with |est[j] - center| > radius[j], or n.
  std::size_t (*first_exceedance)(const double* est, double center, const double* radius,
                                  std::size_t n);
  // a -= scale * u u^T for a row-major d x d matrix.
  void (*rank_one_update)(double* a, std::size_t d, const double* u, double scale);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y = a x for a row-major d x d matrix.
  void (*matvec)(const double* a, std::size_t d, const double* x, double* y);
};

const KernelTable& scalar_kernels();
// nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

const KernelTable& active();
// Overrides the dispatch; throws InputError if the ISA is unavailable.
void select(Isa isa);

// Span front-ends over the active table.

inline void radius_table(double a, double b, std::uint64_t m_first, std::span<double> out) {
  active().radius_table(a, b, m_first, out.size(), out.data());
}

inline std::size_t optimistic_argmax(std::span<const double> est, std::span<const double> rad,
                                     std::span<const double> xi, std::span<double> index) {
  return active().optimistic_argmax(est.data(), rad.data(), xi.data(), est.size(), index.data());
}

inline std::size_t first_exceedance(std::span<const double> est, double center,
                                    std::span<const double> radius) {
  return active().first_exceedance(est.data(), center, radius.data(), est.size());
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

}  // namespace optimist::simd
