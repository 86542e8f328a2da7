#include <cmath>

#include "doctest.h"
#include "optimist/errors.hpp"
#include "optimist/verify.hpp"

using namespace optimist;

namespace {

RadiusSpec canonical(double sigma_sq, double delta) {
  RadiusSpec r;
  r.kind = RadiusKind::Canonical;
  r.sigma_sq = sigma_sq;
  r.delta = delta;
  return r;
}

PolicyConfig policy_of(const RadiusSpec& r, std::size_t k) {
  PolicyConfig p;
  p.radius.assign(k, r);
  return p;
}

// Trace with only the raw (arm, reward) columns meaningful.
BanditTrace hand_trace(std::size_t k, const std::vector<std::pair<std::uint32_t, double>>& steps) {
  BanditTrace t;
  t.num_arms = k;
  t.horizon = steps.size();
  std::vector<std::uint64_t> pulls(k, 0);
  for (auto [a, y] : steps) {
    t.arm.push_back(a);
    t.reward.push_back(y);
    t.pull_count_before.push_back(pulls[a]++);
    for (std::size_t i = 0; i < k; ++i) {
      t.estimate.push_back(0.0);
      t.radius.push_back(0.0);
      t.index.push_back(0.0);
      t.xi.push_back(0.0);
    }
  }
  return t;
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("good event on a zero-noise run") {
  const Environment env = Environment::gaussian({0.9, 0.7}, 0.0);
  const PolicyConfig pc = policy_of(canonical(0.25, 0.05), 2);
  const BanditTrace tr = run_episode(pc, env, 300, 1, 0);
  CHECK(check_good_event(tr, env, pc).holds);
}

TEST_CASE("one planted violation") {
  // delta = e^-2, sigma^2 = 1/4: r(1) = 1, r(2) = 0.707, r(3) = 0.577.
  const Environment env = Environment::gaussian({0.0, -5.0}, 1.0);
  const PolicyConfig pc = policy_of(canonical(0.25, std::exp(-2.0)), 2);
  const BanditTrace tr = hand_trace(2, {{0, 2.0}, {1, -5.0}, {0, -2.0}, {0, 0.0}});
  const GoodEventReport g = check_good_event(tr, env, pc);
  CHECK_FALSE(g.holds);
  REQUIRE(g.violations.size() == 1);
  CHECK(g.violations[0].arm == 0);
  CHECK(g.violations[0].m == 1);
  CHECK(g.violations[0].deviation == doctest::Approx(2.0));
}

TEST_CASE("check_collapse") {
  const RadiusSpec s = canonical(0.25, std::exp(-1.0));
  CHECK(check_collapse(s, 1.0, 32));
  CHECK_FALSE(check_collapse(s, 1.0, 2));
  CHECK(check_collapse(canonical(0.0, 0.3), 0.01, 1));
}

TEST_CASE("deviation check: vacuous and counterexample") {
  const Environment env = Environment::gaussian({0.9, 0.7}, 0.0);
  const PolicyConfig pc = policy_of(canonical(0.25, std::exp(-1.0)), 2);
  const auto th = collapse_thresholds(pc, env);
  REQUIRE(th[1]);
  const std::uint64_t m0 = th[1]->m0;
  CHECK(m0 == 800);

  std::vector<std::pair<std::uint32_t, double>> steps{{0, 0.9}};
  for (std::uint64_t v = 0; v < m0; ++v) steps.push_back({1, 0.7});
  BanditTrace tr = hand_trace(2, steps);
  Recomputation re = recompute(tr, env, pc);
  CHECK(check_lemma_two(tr, env, pc, re, th).all_pass);
  const GoodEventReport good = check_good_event(tr, env, re);
  CHECK(good.holds);
  // N_1 = m0, but the trace keeps pulling arm 1 after r <= gap/4 (m >= 200),
  // which no optimistic run on the good event can do.
  const TheoremReport thm = check_theorem(tr, env, re, th, good);
  REQUIRE(thm.arms.size() == 1);
  CHECK(thm.arms[0].within_m0);
  CHECK(thm.arms[0].collapsed_pulls == 600);
  CHECK_FALSE(thm.pass);

  steps.push_back({1, 0.7});  // visit m0 + 1 with both deviations 0
  tr = hand_trace(2, steps);
  re = recompute(tr, env, pc);
  const LemmaTwoReport lemma = check_lemma_two(tr, env, pc, re, th);
  CHECK_FALSE(lemma.all_pass);
  REQUIRE(lemma.arms.size() == 1);
  CHECK(lemma.arms[0].failures.size() == 1);
  CHECK(lemma.arms[0].failures[0].visit == m0 + 1);
  const GoodEventReport good2 = check_good_event(tr, env, re);
  CHECK_FALSE(check_theorem(tr, env, re, th, good2).pass);

  GoodEventReport failed;
  failed.holds = false;
  CHECK(check_theorem(tr, env, re, th, failed).pass);
  CHECK(pull_bound_holds(std::vector<std::uint64_t>{1, m0}, th, true));
  CHECK_FALSE(pull_bound_holds(std::vector<std::uint64_t>{1, m0 + 1}, th, true));
  CHECK(pull_bound_holds(std::vector<std::uint64_t>{1, m0 + 1}, th, false));
}

TEST_CASE("regret") {
  const Environment env = Environment::bernoulli({0.9, 0.7});
  CHECK(regret(std::vector<std::uint64_t>{100, 0}, env).regret == 0.0);
  CHECK(regret(std::vector<std::uint64_t>{950, 50}, env).regret == doctest::Approx(10.0));
  const Environment three = Environment::bernoulli({0.9, 0.7, 0.4});
  const BanditTrace rr = hand_trace(3, {{0, 1}, {1, 0}, {2, 1}});
  CHECK(regret(rr, three).regret == doctest::Approx(0.7));
  CHECK_THROWS_AS(regret(std::vector<std::uint64_t>{1}, env), InputError);
}

TEST_CASE("tampered columns are caught") {
  const Environment env = Environment::bernoulli({0.9, 0.7});
  const PolicyConfig pc = policy_of(canonical(0.25, 0.01), 2);
  BanditTrace tr = run_episode(pc, env, 200, 2, 0);
  Recomputation re = recompute(tr, env, pc);
  CHECK(check_consistency(tr, re).consistent);
  tr.estimate[2 * 50 + 1] += 1e-6;
  CHECK_FALSE(check_consistency(tr, re).consistent);

  BanditTrace swapped = run_episode(pc, env, 200, 2, 0);
  swapped.reward[10] = 1.0 - swapped.reward[10];
  const ReplicationReport rep = verify_trace(swapped, env, pc);
  CHECK_FALSE(rep.consistency.consistent);
  CHECK_FALSE(rep.deterministic_pass());
}

TEST_CASE("aggregate") {
  const Environment env = Environment::bernoulli({0.9, 0.7});
  const PolicyConfig pc = policy_of(canonical(0.25, 0.01), 2);
  const auto th = collapse_thresholds(pc, env);
  ReplicationReport a, b;
  a.regret = regret(std::vector<std::uint64_t>{90, 10}, env);
  b.regret = regret(std::vector<std::uint64_t>{80, 20}, env);
  const std::vector<ReplicationReport> one{a};
  const AggregateReport s = aggregate(one, th, 0.1);
  CHECK(s.mean_regret == a.regret.regret);
  CHECK(s.std_regret == 0.0);
  CHECK(s.mean_pulls[1] == 10.0);
  const std::vector<ReplicationReport> two{a, b};
  const AggregateReport t = aggregate(two, th, 0.1);
  CHECK(t.mean_pulls[1] == 15.0);
  CHECK(t.pull_bound[1] == th[1]->m0 + 1);
  CHECK(t.all_flags_pass());
  CHECK_THROWS(aggregate(std::vector<ReplicationReport>{}, th, 0.1));
}

TEST_CASE("coverage") {
  const Environment env = Environment::gaussian({0.3, 0.1}, 0.0);
  EstimatorConfig est;
  const CoverageResult c = coverage_estimate(est, canonical(0.25, 0.05), env, 0, 200, 50, 1);
  CHECK(c.frequency == 0.0);
  CHECK(c.violating_paths == 0);

  // A radius of zero on a noisy arm is violated on every path.
  const Environment noisy = Environment::gaussian({0.0, 0.0}, 1.0);
  const CoverageResult z = coverage_estimate(est, canonical(0.0, 0.05), noisy, 0, 10, 20, 1);
  CHECK(z.frequency == 1.0);
  CHECK(z.max_pointwise_frequency == 1.0);
}

TEST_CASE("heavy-tail calibration hits its target on the calibration paths") {
  const Environment env = Environment::student_t({0.0, 0.0}, {1.0, 1.0}, 2.5);
  EstimatorConfig est;
  est.kind = EstimatorKind::MedianOfMeans;
  RadiusSpec h;
  h.kind = RadiusKind::HeavyTail;
  h.delta = 0.1;
  h.d_heavy = 1.0;
  est.log_inv_delta = h.log_inv_delta();
  h.c_heavy = calibrate_heavy_tail_c(est, h, env, 0, 200, 400, 5, 0.05);
  CHECK(h.c_heavy > 0.0);
  const CoverageResult c = coverage_estimate(est, h, env, 0, 200, 400, 5);
  CHECK(c.frequency <= 0.05);
}

}
