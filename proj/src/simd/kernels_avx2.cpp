#include <immintrin.h>

#include <cmath>

#include "optimist/simd/kernels.hpp"

namespace optimist::simd {
namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

void radius_table(double a, double b, std::uint64_t m_first, std::size_t n, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  const __m256d step = _mm256_set1_pd(4.0);
  const double m0 = static_cast<double>(m_first);
  __m256d m = _mm256_setr_pd(m0, m0 + 1.0, m0 + 2.0, m0 + 3.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d r = _mm256_add_pd(_mm256_sqrt_pd(_mm256_div_pd(va, m)), _mm256_div_pd(vb, m));
    _mm256_storeu_pd(out + j, r);
    m = _mm256_add_pd(m, step);
  }
  for (; j < n; ++j) {
    const double mj = static_cast<double>(m_first + j);
    out[j] = std::sqrt(a / mj) + b / mj;
  }
}

std::size_t optimistic_argmax(const double* est, const double* rad, const double* xi,
                              std::size_t n, double* index) {
  if (n == 0) return 0;
  __m256d vmax = _mm256_set1_pd(-HUGE_VAL);
  __m256d bad = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d v = _mm256_add_pd(
        _mm256_add_pd(_mm256_loadu_pd(est + j), _mm256_loadu_pd(rad + j)),
        _mm256_loadu_pd(xi + j));
    _mm256_storeu_pd(index + j, v);
    const __m256d diff = _mm256_sub_pd(v, v);  // NaN for inf and NaN
    bad = _mm256_or_pd(bad, _mm256_cmp_pd(diff, diff, _CMP_UNORD_Q));
    vmax = _mm256_max_pd(vmax, v);
  }
  if (_mm256_movemask_pd(bad) != 0) return n;
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double best = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; j < n; ++j) {
    index[j] = (est[j] + rad[j]) + xi[j];
    if (!std::isfinite(index[j])) return n;
    if (index[j] > best) best = index[j];
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (index[k] == best) return k;
  }
  return n;
}

std::size_t first_exceedance(const double* est, double center, const double* radius,
                             std::size_t n) {
  const __m256d vc = _mm256_set1_pd(center);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d dev = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(est + j), vc));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(dev, _mm256_loadu_pd(radius + j), _CMP_GT_OQ));
    if (mask != 0) return j + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; j < n; ++j) {
    if (std::fabs(est[j] - center) > radius[j]) return j;
  }
  return n;
}

void rank_one_update(double* a, std::size_t d, const double* u, double scale) {
  for (std::size_t i = 0; i < d; ++i) {
    const double si = scale * u[i];
    const __m256d vs = _mm256_set1_pd(si);
    double* row = a + i * d;
    std::size_t j = 0;
    for (; j + 4 <= d; j += 4) {
      const __m256d prod = _mm256_mul_pd(vs, _mm256_loadu_pd(u + j));
      _mm256_storeu_pd(row + j, _mm256_sub_pd(_mm256_loadu_pd(row + j), prod));
    }
    for (; j < d; ++j) row[j] -= si * u[j];
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < n; ++j) s += x[j] * y[j];
  return s;
}

void matvec(const double* a, std::size_t d, const double* x, double* y) {
  for (std::size_t i = 0; i < d; ++i) y[i] = dot(a + i * d, x, d);
}

}  // namespace

const KernelTable* avx2_kernels_compiled() {
  static const KernelTable table{Isa::Avx2,        &radius_table,    &optimistic_argmax,
                                 &first_exceedance, &rank_one_update, &dot,
                                 &matvec};
  return &table;
}

}  // namespace optimist::simd
