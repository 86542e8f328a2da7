#include <cmath>

#include "doctest.h"
#include "optimist/errors.hpp"
#include "optimist/policy.hpp"
#include "optimist/verify.hpp"

using namespace optimist;

namespace {

PolicyConfig canonical_policy(std::size_t k, double delta, double sigma_sq = 0.25) {
  PolicyConfig p;
  RadiusSpec r;
  r.kind = RadiusKind::Canonical;
  r.sigma_sq = sigma_sq;
  r.delta = delta;
  p.radius.assign(k, r);
  return p;
}

PolicyConfig ucb_policy(std::size_t k, std::uint64_t horizon) {
  PolicyConfig p;
  RadiusSpec r;
  r.kind = RadiusKind::UcbHoeffding;
  r.horizon = horizon;
  p.radius.assign(k, r);
  return p;
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("select_arm") {
  CHECK(select_arm(std::vector<double>{0.2, 0.9, 0.9}) == 1);
  CHECK(select_arm(std::vector<double>{0.4, 0.4, 0.4}) == 0);
  CHECK(select_arm(std::vector<double>{-1.0, 0.0, 3.0}) == 2);
  CHECK_THROWS_AS(select_arm(std::vector<double>{0.0, NAN}), InternalError);
  CHECK_THROWS_AS(select_arm(std::vector<double>{}), InputError);
}

TEST_CASE("round-robin then argmax") {
  const Environment env = Environment::bernoulli({0.1, 0.5, 0.9});
  OptimisticPolicy p(canonical_policy(3, 0.1), env, 1, 0);
  for (std::size_t t = 0; t < 3; ++t) {
    const StepRecord r = p.step();
    CHECK(r.chosen_arm == t);
    CHECK(r.pull_count_before == 0);
    CHECK(r.xi == std::vector<double>(3, 0.0));
  }
  const StepRecord r = p.step();
  std::vector<double> idx(r.index);
  CHECK(r.chosen_arm == select_arm(idx));
}

TEST_CASE("unpulled arms carry NaN estimates and infinite radii") {
  const Environment env = Environment::bernoulli({0.1, 0.5});
  OptimisticPolicy p(canonical_policy(2, 0.1), env, 1, 0);
  const StepRecord r = p.step();
  CHECK(std::isnan(r.estimate[0]));
  CHECK(std::isinf(r.radius[1]));
}

TEST_CASE("zero-noise run stays within m0 + 1") {
  const Environment env = Environment::gaussian({0.9, 0.7}, 0.0);
  const PolicyConfig pc = canonical_policy(2, 0.05);
  const BanditTrace tr = run_episode(pc, env, 100, 3, 0);
  const auto m0 = collapse_threshold(pc.radius[1], 0.2).m0;
  CHECK(tr.pull_counts()[1] <= m0 + 1);
  const ReplicationReport rep = verify_trace(tr, env, pc);
  CHECK(rep.consistency.consistent);
  CHECK(rep.lemma_two.all_pass);
  CHECK(rep.theorem.pass);
}

TEST_CASE("episodes") {
  const Environment env = Environment::bernoulli({0.9, 0.7, 0.2});
  const PolicyConfig pc = canonical_policy(3, 0.01);
  const BanditTrace once = run_episode(pc, env, 3, 9, 0);
  CHECK(once.pull_counts() == std::vector<std::uint64_t>{1, 1, 1});
  const BanditTrace a = run_episode(pc, env, 500, 9, 4);
  const BanditTrace b = run_episode(pc, env, 500, 9, 4);
  const BanditTrace c = run_episode(pc, env, 500, 9, 5);
  CHECK(a.same_steps(b));
  CHECK_FALSE(a.same_steps(c));
  CHECK(run_episode_counts(pc, env, 500, 9, 4).pull_counts == a.pull_counts());
  CHECK_THROWS_AS(run_episode(pc, env, 2, 9, 0), InputError);
}

TEST_CASE("UCB suboptimal pulls stay below T/2") {
  const Environment env = Environment::bernoulli({0.9, 0.7});
  const PolicyConfig pc = ucb_policy(2, 10000);
  int good = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    if (run_episode_counts(pc, env, 10000, 17, r).pull_counts[1] < 5000) ++good;
  }
  CHECK(good >= 99);
}

TEST_CASE("perturbations") {
  CounterRng rng(1, 0, kPerturbStream, 0);
  PerturbSpec zero;
  CHECK(draw_perturbations(zero, 4, rng) == std::vector<double>(4, 0.0));

  PerturbSpec u{0.1, PerturbDistribution::UniformSymmetric, 1.0};
  double sum = 0.0;
  const int n = 1000000;
  for (int t = 0; t < n / 4; ++t) {
    CounterRng r(2, 0, kPerturbStream, static_cast<std::uint64_t>(t));
    for (double x : draw_perturbations(u, 4, r)) {
      CHECK((x >= -0.1 && x <= 0.1));
      sum += x;
    }
  }
  CHECK(std::fabs(sum / n) <= 0.001);

  PerturbSpec g{0.05, PerturbDistribution::TruncatedGaussian, 1.0};
  CounterRng r(3, 0, kPerturbStream, 0);
  for (double x : draw_perturbations(g, 64, r)) CHECK(std::fabs(x) <= 0.05);
}

TEST_CASE("zero perturbation reproduces the unperturbed run bit for bit") {
  const Environment env = Environment::bernoulli({0.9, 0.7, 0.6});
  PolicyConfig plain = canonical_policy(3, 0.01);
  PolicyConfig pert = plain;
  pert.perturbation = PerturbSpec{0.0, PerturbDistribution::UniformSymmetric, 1.0};
  CHECK(run_episode(plain, env, 2000, 5, 1).same_steps(run_episode(pert, env, 2000, 5, 1)));
}

TEST_CASE("config validation") {
  const Environment env = Environment::bernoulli({0.9, 0.7});
  PolicyConfig bad = canonical_policy(3, 0.1);
  CHECK_THROWS_AS(bad.validate(env), InputError);
  PolicyConfig mixed = canonical_policy(2, 0.1);
  mixed.radius[1].kind = RadiusKind::UcbHoeffding;
  CHECK_THROWS_AS(mixed.validate(env), InputError);
  PolicyConfig lin = canonical_policy(2, 0.1);
  lin.radius[0].kind = lin.radius[1].kind = RadiusKind::LinUcb;
  CHECK_THROWS_AS(lin.validate(env), InputError);
}

TEST_CASE("structured policies run and replay") {
  const Environment lin = Environment::linear({0.5, -0.2}, {{1, 0}, {0, 1}, {0.7, 0.7}}, 0.1);
  PolicyConfig pc;
  pc.estimator.kind = EstimatorKind::Ridge;
  RadiusSpec r;
  r.kind = RadiusKind::LinUcb;
  r.alpha_t = 1.0;
  pc.radius.assign(3, r);
  const BanditTrace a = run_episode(pc, lin, 300, 1, 0);
  CHECK(a.same_steps(run_episode(pc, lin, 300, 1, 0)));
  CHECK(verify_trace(a, lin, pc).consistency.consistent);

  KernelSpec k;
  const Environment gpe = Environment::rkhs({{0.0}, {0.5}, {1.0}}, k, {0.1, 0.5, 0.2}, 0.1);
  PolicyConfig gc;
  gc.estimator.kind = EstimatorKind::GpPosterior;
  gc.estimator.gp_noise_variance = 0.01;
  RadiusSpec gr;
  gr.kind = RadiusKind::GpUcb;
  gr.num_arms = 3;
  gc.radius.assign(3, gr);
  const BanditTrace g = run_episode(gc, gpe, 200, 1, 0);
  CHECK(verify_trace(g, gpe, gc).consistency.consistent);
}

}
