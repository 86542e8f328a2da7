#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "optimist/errors.hpp"
#include "optimist/radius.hpp"

using namespace optimist;

namespace {

RadiusSpec canonical(double sigma_sq, double c1, double delta) {
  RadiusSpec s;
  s.kind = RadiusKind::Canonical;
  s.sigma_sq = sigma_sq;
  s.c1 = c1;
  s.delta = delta;
  return s;
}

}  // namespace

TEST_SUITE("radius") {

TEST_CASE("canonical radius") {
  const RadiusSpec s = canonical(0.25, 0.0, std::exp(-2.0));
  CHECK(canonical_radius(s, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(canonical_radius(s, 4) == doctest::Approx(0.5).epsilon(1e-14));
  const RadiusSpec zero = canonical(0.0, 0.0, 0.1);
  for (std::uint64_t m : {1u, 7u, 1000u}) CHECK(canonical_radius(zero, m) == 0.0);
  CHECK_THROWS_AS(canonical_radius(s, 0), InputError);
  CHECK_THROWS_AS(canonical_radius(canonical(0.25, 0.0, 1.0), 1), InputError);
  CHECK_THROWS_AS(canonical_radius(canonical(-0.1, 0.0, 0.5), 1), InputError);
}

TEST_CASE("collapse threshold examples") {
  const double e1 = std::exp(-1.0);
  CHECK(collapse_threshold(canonical(0.25, 0.0, e1), 1.0).m0 == 32);
  CHECK(canonical_radius(canonical(0.25, 0.0, e1), 32) == doctest::Approx(0.125));
  CHECK(collapse_threshold(canonical(0.25, 1.0, e1), 1.0).m0 == 32);
  CHECK(collapse_threshold(canonical(0.0, 1.0, e1), 2.0).m0 == 4);
  CHECK(collapse_threshold(canonical(0.0, 0.0, 0.5), 0.3).m0 == 1);
  // Reference run: K = 2, T = 2e4, delta = 1/(KT), gap 0.2.
  CHECK(collapse_threshold(canonical(0.25, 0.0, 1.0 / 40000.0), 0.2).m0 == 8478);
  CHECK_THROWS_AS(collapse_threshold(canonical(0.25, 0.0, 0.1), 0.0), InputError);
}

TEST_CASE("collapse postcondition on random specs") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const RadiusSpec s = canonical(u(g), u(g) < 0.3 ? 0.0 : 2 * u(g), std::pow(10.0, -6 * u(g) - 1e-3));
    const double gap = 0.01 + u(g);
    const auto m0 = collapse_threshold(s, gap).m0;
    CHECK(canonical_radius(s, m0) <= gap / 4);
  }
}

TEST_CASE("UCB and UCB-V") {
  CHECK(ucb_radius(3, 2) > 0.0);
  // T = e and T = e^4 are not integers; the examples pin log T directly.
  RadiusSpec s;
  s.kind = RadiusKind::UcbHoeffding;
  s.horizon = 55;  // log 55 ~ 4.007
  CHECK(ucb_radius(55, 8) == doctest::Approx(std::sqrt(2 * std::log(55.0) / 8)));
  CHECK(ucb_radius(1000, 3) / ucb_radius(1000, 12) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ucbv_radius(0.0, 1000, 3) == doctest::Approx(std::log(1000.0)));
  CHECK(ucbv_radius(0.5, 1000, 1) == doctest::Approx(std::sqrt(std::log(1000.0)) + 3.0 * std::log(1000.0)));
  CHECK(ucbv_radius(0.0, 1000, 1000000) < ucbv_radius(0.0, 1000, 1000));
  CHECK_THROWS(ucbv_radius(-1.0, 10, 1));
}

TEST_CASE("structured and heavy-tail radii") {
  CHECK(linucb_radius(2.0, 0.5) == 1.0);
  CHECK(linucb_radius(7.0, 0.0) == 0.0);
  CHECK(linucb_radius(1.0, 1.0) == 1.0);
  CHECK(gpucb_radius(4.0, 0.5) == 1.0);
  CHECK(gpucb_radius(4.0, 0.0) == 0.0);
  CHECK(gpucb_radius(4.0, 1.0) == 2.0);

  RadiusSpec h;
  h.kind = RadiusKind::HeavyTail;
  h.delta = std::exp(-1.0);
  h.c_heavy = 1.0;
  CHECK(heavy_tail_radius(h, 1) == doctest::Approx(1.0));
  h.c_heavy = 0.0;
  h.d_heavy = 2.0;
  CHECK(heavy_tail_radius(h, 4) == doctest::Approx(0.5));
  h.d_heavy = 0.0;
  CHECK(heavy_tail_radius(h, 9) == 0.0);
}

TEST_CASE("GP-UCB beta schedule") {
  const double b = gpucb_beta(5, 10, 0.1);
  CHECK(b == doctest::Approx(2 * std::log(5 * 100 * std::numbers::pi * std::numbers::pi / 0.6)));
  RadiusSpec s;
  s.kind = RadiusKind::GpUcb;
  s.num_arms = 5;
  s.delta = 0.1;
  s.horizon = 50;
  s.beta_schedule = BetaSchedule::Horizon;
  CHECK(gpucb_beta_at(s, 3) == gpucb_beta(5, 50, 0.1));
  s.beta_schedule = BetaSchedule::Fixed;
  s.beta_t = 4.0;
  CHECK(gpucb_beta_at(s, 3) == 4.0);
}

TEST_CASE("envelope thresholds") {
  RadiusSpec u;
  u.kind = RadiusKind::UcbHoeffding;
  u.horizon = 20000;
  const auto t = envelope_threshold(u, 0.2);
  REQUIRE(t);
  CHECK(ucb_radius(20000, t->m0) <= 0.05);
  // same slack as the canonical m0: the square-root term alone sits at gap/8
  CHECK(ucb_radius(20000, t->m0 - 1) > 0.2 / 8);
  RadiusSpec l;
  l.kind = RadiusKind::LinUcb;
  CHECK_FALSE(envelope_threshold(l, 0.2));
}

TEST_CASE("radius table matches pointwise radii") {
  RadiusSpec s = canonical(0.3, 0.2, 0.01);
  std::vector<double> t(100);
  radius_table(s, 3, t);
  for (std::size_t j = 0; j < t.size(); ++j) CHECK(t[j] == canonical_radius(s, 3 + j));
  s.kind = RadiusKind::UcbV;
  CHECK_THROWS(radius_table(s, 1, t));
}

}
