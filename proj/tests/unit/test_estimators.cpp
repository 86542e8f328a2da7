#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "optimist/errors.hpp"
#include "optimist/estimators.hpp"

using namespace optimist;

namespace {

SampleBuffer buffer_of(std::initializer_list<double> xs) {
  SampleBuffer b;
  for (double x : xs) b.push(x);
  return b;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("Welford examples") {
  MeanVarState s = update_mean_var({}, 5.0);
  CHECK(s.count == 1);
  CHECK(s.mean == 5.0);
  CHECK(s.variance() == 0.0);

  s = {};
  for (double x : {1.0, 2.0, 3.0}) s = update_mean_var(s, x);
  CHECK(s.mean == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.variance() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(update_mean_var(s, NAN), InputError);
}

TEST_CASE("Welford vs two-pass on normal draws") {
  std::mt19937_64 g(42);
  std::normal_distribution<double> z;
  std::vector<double> xs(10000);
  for (double& x : xs) x = z(g);
  MeanVarState s;
  for (double x : xs) s = update_mean_var(s, x);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  CHECK(std::fabs(s.mean - mean) <= 1e-10);
  CHECK(std::fabs(s.variance() - ss / xs.size()) <= 1e-10);
}

TEST_CASE("median of means") {
  CHECK(median_of_means(buffer_of({2, 2, 2, 2, 2}), 3) == 2.0);
  CHECK(median_of_means(buffer_of({1, 2, 3, 4, 5, 6}), 3) == 3.5);
  CHECK(median_of_means(buffer_of({1, 2, 3, 4, 5, 6}), 1) == 3.5);
  CHECK(median_of_means(buffer_of({1, 2, 3, 4, 10, 20}), 1) == doctest::Approx(40.0 / 6));
  // Even number of blocks: midpoint of the two central block means.
  CHECK(median_of_means(buffer_of({1, 2, 3, 4}), 4) == 2.5);
  // Uneven split: blocks (1,2) (3) (4) -> means 1.5, 3, 4.
  CHECK(median_of_means(buffer_of({1, 2, 3, 4}), 3) == 3.0);
  // Prefix form uses the first n samples only.
  CHECK(median_of_means(buffer_of({1, 2, 3, 4, 5, 6, 100}), 3, 6) == 3.5);
  CHECK_THROWS(median_of_means(buffer_of({1, 2}), 0));
  CHECK_THROWS(median_of_means(buffer_of({1, 2}), 3));
  CHECK_THROWS(median_of_means(SampleBuffer{}, 1));
}

TEST_CASE("truncated mean") {
  CHECK(truncated_mean(buffer_of({0.1, 0.2}), 10.0) == doctest::Approx(0.15));
  CHECK(truncated_mean(buffer_of({100, -100}), 1.0) == 0.0);
  CHECK(truncated_mean(buffer_of({5, 1}), 2.0) == 1.5);
  CHECK_THROWS(truncated_mean(buffer_of({1}), 0.0));
}

TEST_CASE("ridge worked example") {
  RidgeState r(2, 1.0);
  const std::vector<double> e1{1.0, 0.0};
  CHECK(r.theta_hat()[0] == 0.0);
  CHECK(r.theta_hat()[1] == 0.0);
  auto p = r.predict(std::vector<double>{0.6, 0.8});
  CHECK(p.mean == 0.0);
  CHECK(p.width == doctest::Approx(1.0));
  r.update(e1, 1.0);
  CHECK(r.v_matrix()[0] == 2.0);
  CHECK(r.v_matrix()[3] == 1.0);
  CHECK(r.theta_hat()[0] == doctest::Approx(0.5));
  CHECK(r.theta_hat()[1] == doctest::Approx(0.0));
  p = r.predict(e1);
  CHECK(p.mean == doctest::Approx(0.5));
  CHECK(p.width == doctest::Approx(std::sqrt(0.5)));
  p = r.predict(std::vector<double>{0.0, 0.0});
  CHECK(p.mean == 0.0);
  CHECK(p.width == 0.0);
  CHECK_THROWS(r.update(std::vector<double>{1.0}, 1.0));
  CHECK_THROWS(RidgeState(2, 0.0));
}

TEST_CASE("ridge matches a dense solve across refactors") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> z;
  const std::size_t d = 6;
  RidgeState r(d, 0.5);
  Eigen::MatrixXd v = 0.5 * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (int n = 0; n < 600; ++n) {
    std::vector<double> x(d);
    for (double& xi : x) xi = z(g);
    const double y = z(g);
    r.update(x, y);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
    v += xv * xv.transpose();
    b += y * xv;
    if (n % 50 == 49) {
      const Eigen::VectorXd theta = v.ldlt().solve(b);
      for (std::size_t j = 0; j < d; ++j) CHECK(std::fabs(r.theta_hat()[j] - theta[j]) <= 1e-8);
    }
  }
}

TEST_CASE("GP prior and one observation") {
  KernelSpec k;
  GpPosterior gp(k, {{0.0}, {100.0}}, 1.0);
  CHECK(gp.mean(0) == 0.0);
  CHECK(gp.stddev(0) == 1.0);
  gp.update(0, 2.0);
  CHECK(gp.mean(0) == doctest::Approx(1.0));
  CHECK(gp.stddev(0) * gp.stddev(0) == doctest::Approx(0.5));
  // Arm 1 is uncorrelated with arm 0 (k underflows to 0).
  CHECK(gp.mean(1) == 0.0);
  CHECK(gp.stddev(1) == 1.0);
  CHECK_THROWS(GpPosterior(k, {{0.0}}, 0.0));
}

TEST_CASE("GP aggregated posterior equals the n x n formula") {
  KernelSpec k;
  k.lengthscale = 0.7;
  const std::vector<std::vector<double>> pts{{0.0}, {0.5}, {1.0}, {1.5}};
  const double noise = 0.3;
  GpPosterior gp(k, pts, noise);
  const std::vector<std::pair<std::size_t, double>> obs{{0, 0.2}, {2, -0.1}, {0, 0.4}, {3, 1.0}, {2, 0.0}};
  for (auto [a, y] : obs) gp.update(a, y);
  const std::size_t n = obs.size();
  Eigen::MatrixXd kn(n, n);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = obs[i].second;
    for (std::size_t j = 0; j < n; ++j) kn(i, j) = k(pts[obs[i].first], pts[obs[j].first]);
  }
  kn += noise * Eigen::MatrixXd::Identity(n, n);
  const auto llt = kn.llt();
  for (std::size_t a = 0; a < pts.size(); ++a) {
    Eigen::VectorXd kx(n);
    for (std::size_t i = 0; i < n; ++i) kx[i] = k(pts[a], pts[obs[i].first]);
    const double mean = kx.dot(llt.solve(y));
    const double var = k(pts[a], pts[a]) - kx.dot(llt.solve(kx));
    CHECK(gp.mean(a) == doctest::Approx(mean).epsilon(1e-10));
    CHECK(gp.stddev(a) == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
  }
}

TEST_CASE("estimator bank values") {
  const Environment env = Environment::bernoulli({0.4, 0.5});
  EstimatorConfig c;
  EstimatorBank bank(c, env);
  CHECK_THROWS_AS(bank.value(0), NotInitializedError);
  for (double x : {0.0, 1.0, 0.2}) bank.observe(0, x);
  CHECK(bank.value(0) == doctest::Approx(0.4));

  c.kind = EstimatorKind::MedianOfMeans;
  c.mom_blocks = 3;
  EstimatorBank mom(c, env);
  for (double x : {1, 2, 3, 4, 5, 6}) mom.observe(1, x);
  CHECK(mom.value(1) == 3.5);

  const Environment lin = Environment::linear({1.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}}, 0.1);
  EstimatorConfig rc;
  rc.kind = EstimatorKind::Ridge;
  EstimatorBank ridge(rc, lin);
  ridge.observe(0, 1.0);
  CHECK(ridge.value(0) == doctest::Approx(0.5));
  CHECK(ridge.width(0) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS(EstimatorBank(rc, env));
}

TEST_CASE("default block count and truncation schedule") {
  EstimatorConfig c;
  c.log_inv_delta = std::log(20.0);  // ~3.0 -> ceil(8 L) = 24
  CHECK(mom_block_count(c, 1000) == 24);
  CHECK(mom_block_count(c, 10) == 10);
  c.truncation_scale = 4.0;
  c.log_inv_delta = 1.0;
  CHECK(truncation_threshold(c, 9) == doctest::Approx(6.0));
}

}
