#include <cmath>

#include "optimist/simd/kernels.hpp"

namespace optimist::simd {
namespace {

void radius_table(double a, double b, std::uint64_t m_first, std::size_t n, double* out) {
  for (std::size_t j = 0; j < n; ++j) {
    const double m = static_cast<double>(m_first + j);
    out[j] = std::sqrt(a / m) + b / m;
  }
}

std::size_t optimistic_argmax(const double* est, const double* rad, const double* xi,
                              std::size_t n, double* index) {
  std::size_t best = 0;
  for (std::size_t j = 0; j < n; ++j) {
    index[j] = (est[j] + rad[j]) + xi[j];
    if (!std::isfinite(index[j])) return n;
    if (index[j] > index[best]) best = j;
  }
  return best;
}

std::size_t first_exceedance(const double* est, double center, const double* radius,
                             std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    if (std::fabs(est[j] - center) > radius[j]) return j;
  }
  return n;
}

void rank_one_update(double* a, std::size_t d, const double* u, double scale) {
  for (std::size_t i = 0; i < d; ++i) {
    const double si = scale * u[i];
    for (std::size_t j = 0; j < d; ++j) a[i * d + j] -= si * u[j];
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += x[j] * y[j];
  return s;
}

void matvec(const double* a, std::size_t d, const double* x, double* y) {
  for (std::size_t i = 0; i < d; ++i) y[i] = dot(a + i * d, x, d);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::Scalar,      &radius_table,    &optimistic_argmax,
                                 &first_exceedance, &rank_one_update, &dot,
                                 &matvec};
  return table;
}

}  // namespace optimist::simd
