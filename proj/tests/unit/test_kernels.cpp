#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "optimist/simd/kernels.hpp"

using namespace optimist::simd;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

std::vector<double> randoms(std::mt19937_64& g, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(g);
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar argmax picks the lowest tied index") {
  const KernelTable& k = scalar_kernels();
  std::vector<double> est{0.2, 0.9, 0.9}, zero(3, 0.0), idx(3);
  CHECK(k.optimistic_argmax(est.data(), zero.data(), zero.data(), 3, idx.data()) == 1);
  std::vector<double> eq(5, 0.3), z5(5, 0.0), i5(5);
  CHECK(k.optimistic_argmax(eq.data(), z5.data(), z5.data(), 5, i5.data()) == 0);
}

TEST_CASE("argmax reports non-finite indices") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const KernelTable* k : {&scalar_kernels(), avx2_kernels()}) {
    if (k == nullptr) continue;
    for (std::size_t pos : {0u, 3u, 6u}) {
      std::vector<double> est(7, 0.5), rad(7, 0.1), xi(7, 0.0), idx(7);
      est[pos] = nan;
      CHECK(k->optimistic_argmax(est.data(), rad.data(), xi.data(), 7, idx.data()) == 7);
      est[pos] = 0.5;
      rad[pos] = std::numeric_limits<double>::infinity();
      CHECK(k->optimistic_argmax(est.data(), rad.data(), xi.data(), 7, idx.data()) == 7);
    }
  }
}

TEST_CASE("first_exceedance is strict") {
  std::vector<double> est{0.5, 0.75, 0.76}, rad{0.25, 0.25, 0.25};
  CHECK(scalar_kernels().first_exceedance(est.data(), 0.5, rad.data(), 3) == 2);
  CHECK(scalar_kernels().first_exceedance(est.data(), 0.5, rad.data(), 2) == 2);
}

TEST_CASE("AVX2 variants agree with the scalar reference") {
  const KernelTable* v = avx2_kernels();
  if (v == nullptr) {
    MESSAGE("AVX2 not available; equivalence not exercised");
    return;
  }
  const KernelTable& s = scalar_kernels();
  std::mt19937_64 g(7);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 17u, 31u, 100u, 1001u}) {
    CAPTURE(n);
    std::vector<double> a(n), b(n);
    s.radius_table(0.37, 1.3, 5, n, a.data());
    v->radius_table(0.37, 1.3, 5, n, b.data());
    CHECK(same_bits(a, b));

    auto est = randoms(g, n, -1, 1), rad = randoms(g, n, 0, 1), xi = randoms(g, n, -0.1, 0.1);
    if (n > 3) est[n / 2] = est[n - 1], rad[n / 2] = rad[n - 1], xi[n / 2] = xi[n - 1];  // a tie
    std::vector<double> ia(n), ib(n);
    CHECK(s.optimistic_argmax(est.data(), rad.data(), xi.data(), n, ia.data()) ==
          v->optimistic_argmax(est.data(), rad.data(), xi.data(), n, ib.data()));
    CHECK(same_bits(ia, ib));

    auto wide = randoms(g, n, 0.3, 2.0);
    CHECK(s.first_exceedance(est.data(), 0.1, wide.data(), n) ==
          v->first_exceedance(est.data(), 0.1, wide.data(), n));
    CHECK(s.first_exceedance(est.data(), 0.1, rad.data(), n) ==
          v->first_exceedance(est.data(), 0.1, rad.data(), n));

    auto x = randoms(g, n, -1, 1), y = randoms(g, n, -1, 1);
    CHECK(s.dot(x.data(), y.data(), n) == doctest::Approx(v->dot(x.data(), y.data(), n)).epsilon(1e-12));
  }
  for (std::size_t d : {1u, 2u, 3u, 4u, 5u, 8u, 13u, 16u}) {
    CAPTURE(d);
    auto m = randoms(g, d * d, -1, 1), u = randoms(g, d, -1, 1);
    auto m2 = m;
    s.rank_one_update(m.data(), d, u.data(), 0.31);
    v->rank_one_update(m2.data(), d, u.data(), 0.31);
    CHECK(same_bits(m, m2));
    std::vector<double> ya(d), yb(d);
    s.matvec(m.data(), d, u.data(), ya.data());
    v->matvec(m.data(), d, u.data(), yb.data());
    for (std::size_t i = 0; i < d; ++i) CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-12));
  }
}

TEST_CASE("dispatch can be forced and restored") {
  const Isa before = active().isa;
  select(Isa::Scalar);
  CHECK(active().isa == Isa::Scalar);
  if (avx2_kernels() != nullptr) {
    select(Isa::Avx2);
    CHECK(active().isa == Isa::Avx2);
  }
  select(before);
  CHECK(isa_name(Isa::Scalar) == "scalar");
}

}
