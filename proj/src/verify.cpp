#include "optimist/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "optimist/errors.hpp"
#include "optimist/estimators.hpp"
#include "optimist/simd/kernels.hpp"

namespace optimist {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_time_indexed(RadiusKind kind) {
  return kind == RadiusKind::LinUcb || kind == RadiusKind::GpUcb;
}

bool differs(double recorded, double expected, double tol) {
  if (std::isnan(recorded) || std::isnan(expected)) return std::isnan(recorded) != std::isnan(expected);
  if (std::isinf(recorded) || std::isinf(expected)) return recorded != expected;
  return std::fabs(recorded - expected) > tol * std::max(1.0, std::fabs(expected));
}

void require_matching(const BanditTrace& trace, const Environment& env) {
  if (trace.num_arms != env.num_arms()) {
    throw InputError("trace has " + std::to_string(trace.num_arms) + " arms, environment has " +
                     std::to_string(env.num_arms()));
  }
}

// Radius of arm i at its m-th pull count, m >= 1, from the running moments.
void fill_per_arm(const PolicyConfig& config, std::size_t arm, std::span<const double> rewards,
                  std::vector<double>& est, std::vector<double>& rad) {
  const RadiusSpec& spec = config.radius[arm];
  const std::size_t n = rewards.size();
  est.resize(n);
  rad.resize(n);
  const bool table = envelope_is_exact(spec.kind);
  if (table && n > 0) radius_table(spec, 1, rad);
  MeanVarState stats;
  SampleBuffer buffer;
  const bool buffered = config.estimator.kind == EstimatorKind::MedianOfMeans ||
                        config.estimator.kind == EstimatorKind::TruncatedMean;
  for (std::size_t m = 1; m <= n; ++m) {
    const double x = rewards[m - 1];
    stats = update_mean_var(stats, x);
    if (buffered) buffer.push(x);
    est[m - 1] = per_arm_value(config.estimator, stats, buffer, m);
    if (!table) rad[m - 1] = per_arm_radius(spec, m, stats.variance());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Recomputation recompute(const BanditTrace& trace, const Environment& env,
                        const PolicyConfig& config) {
  require_matching(trace, env);
  config.validate(env);
  const std::size_t k = trace.num_arms;
  const std::size_t steps = trace.steps();
  Recomputation re;
  re.num_arms = k;
  re.time_indexed = is_time_indexed(config.radius_kind());
  re.visit_times.assign(k, {});
  for (std::size_t t = 0; t < steps; ++t) re.visit_times[trace.arm[t]].push_back(t);
  re.estimate.assign(steps * k, kNaN);
  re.radius.assign(steps * k, kInf);

  if (!re.time_indexed) {
    re.estimate_by_count.resize(k);
    re.radius_by_count.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> rewards;
      rewards.reserve(re.visit_times[i].size());
      for (std::uint64_t t : re.visit_times[i]) rewards.push_back(trace.reward[t]);
      fill_per_arm(config, i, rewards, re.estimate_by_count[i], re.radius_by_count[i]);
    }
    std::vector<std::uint64_t> pulls(k, 0);
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t i = 0; i < k; ++i) {
        if (pulls[i] == 0) continue;
        re.estimate[t * k + i] = re.estimate_by_count[i][pulls[i] - 1];
        re.radius[t * k + i] = re.radius_by_count[i][pulls[i] - 1];
      }
      ++pulls[trace.arm[t]];
    }
    return re;
  }

  EstimatorBank bank(config.estimator, env);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      const RadiusSpec& spec = config.radius[i];
      re.estimate[t * k + i] = bank.value(i);
      re.radius[t * k + i] = config.radius_kind() == RadiusKind::LinUcb
                                 ? linucb_radius(spec.alpha_t, bank.width(i))
                                 : gpucb_radius(gpucb_beta_at(spec, t + 1), bank.width(i));
    }
    bank.observe(trace.arm[t], trace.reward[t]);
  }
  return re;
}

ConsistencyReport check_consistency(const BanditTrace& trace, const Recomputation& re,
                                    double tolerance) {
  ConsistencyReport rep;
  const std::size_t k = trace.num_arms;
  const auto flag = [&](std::size_t t, const std::string& what) {
    if (rep.mismatches++ == 0) {
      std::ostringstream os;
      os << "t=" << t << ": " << what;
      rep.first_mismatch = os.str();
    }
    rep.consistent = false;
  };
  if (trace.estimate.size() != trace.steps() * k || trace.radius.size() != trace.steps() * k ||
      trace.index.size() != trace.steps() * k || trace.xi.size() != trace.steps() * k) {
    flag(0, "per-arm columns have the wrong length");
    return rep;
  }
  std::vector<std::uint64_t> pulls(k, 0);
  std::vector<double> index(k);
  for (std::size_t t = 0; t < trace.steps(); ++t) {
    const auto est = trace.estimates_at(t);
    const auto rad = trace.radii_at(t);
    const auto idx = trace.indices_at(t);
    const auto xi = trace.xi_at(t);
    for (std::size_t i = 0; i < k; ++i) {
      if (differs(est[i], re.estimate_at(t, i), tolerance)) flag(t, "estimate of arm " + std::to_string(i));
      if (differs(rad[i], re.radius_at(t, i), tolerance)) flag(t, "radius of arm " + std::to_string(i));
      if (differs(idx[i], (est[i] + rad[i]) + xi[i], tolerance)) flag(t, "index of arm " + std::to_string(i));
    }
    const std::size_t chosen = trace.arm[t];
    if (t < k) {
      if (chosen != t) flag(t, "round-robin order broken");
    } else {
      const std::size_t best = simd::optimistic_argmax(est, rad, xi, index);
      if (best != chosen) flag(t, "chosen arm is not the lowest argmax of the index");
    }
    if (trace.pull_count_before[t] != pulls[chosen]) flag(t, "pull_count_before");
    ++pulls[chosen];
  }
  return rep;
}

// ---------------------------------------------------------------------------

GoodEventReport check_good_event(const BanditTrace& trace, const Environment& env,
                                 const Recomputation& re) {
  require_matching(trace, env);
  GoodEventReport rep;
  rep.time_indexed = re.time_indexed;
  const std::size_t k = re.num_arms;
  if (!re.time_indexed) {
    for (std::size_t j = 0; j < k; ++j) {
      const double mu = env.true_mean(j);
      const std::span<const double> est = re.estimate_by_count[j];
      const std::span<const double> rad = re.radius_by_count[j];
      std::size_t pos = 0;
      while (pos < est.size()) {
        const std::size_t hit = pos + simd::first_exceedance(est.subspan(pos), mu, rad.subspan(pos));
        if (hit >= est.size()) break;
        rep.violations.push_back({j, hit + 1, std::fabs(est[hit] - mu), rad[hit]});
        pos = hit + 1;
      }
    }
  } else {
    const std::size_t steps = re.estimate.size() / std::max<std::size_t>(k, 1);
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t j = 0; j < k; ++j) {
        const double dev = std::fabs(re.estimate_at(t, j) - env.true_mean(j));
        if (dev > re.radius_at(t, j)) rep.violations.push_back({j, t, dev, re.radius_at(t, j)});
      }
    }
  }
  rep.holds = rep.violations.empty();
  return rep;
}

GoodEventReport check_good_event(const BanditTrace& trace, const Environment& env,
                                 const PolicyConfig& config) {
  return check_good_event(trace, env, recompute(trace, env, config));
}

bool check_collapse(const RadiusSpec& spec, double gap, std::uint64_t m0) {
  const std::optional<SqrtLinear> e = envelope(spec);
  if (!e) throw InputError("check_collapse needs a closed-form radius");
  return (*e)(m0) <= gap / 4.0;
}

std::vector<std::optional<CollapseThreshold>> collapse_thresholds(const PolicyConfig& config,
                                                                  const Environment& env) {
  const GapProfile g = env.gap_profile();
  std::vector<std::optional<CollapseThreshold>> out(env.num_arms());
  for (std::size_t i = 0; i < env.num_arms(); ++i) {
    const RadiusSpec& spec = config.radius.at(i);
    if (!(g.gaps[i] > 0.0)) continue;
    const bool dominated = envelope_is_exact(spec.kind) ||
                           (spec.kind == RadiusKind::UcbV && env.is_bounded() && spec.sigma_sq >= 0.25);
    if (dominated) out[i] = envelope_threshold(spec, g.gaps[i], i);
  }
  return out;
}

// ---------------------------------------------------------------------------

LemmaTwoReport check_lemma_two(const BanditTrace& trace, const Environment& env,
                               const PolicyConfig& config, const Recomputation& re,
                               std::span<const std::optional<CollapseThreshold>> thresholds) {
  require_matching(trace, env);
  const GapProfile g = env.gap_profile();
  LemmaTwoReport rep;
  rep.perturbed = config.perturbation.has_value();
  const double rho = rep.perturbed ? config.perturbation->rho_t : 0.0;

  for (std::size_t i = 0; i < re.num_arms; ++i) {
    const double gap = g.gaps[i];
    if (!(gap > 0.0)) continue;
    ArmLemmaReport arm;
    arm.arm = i;
    arm.gap = gap;
    arm.threshold = rep.perturbed ? gap / 8.0 : gap / 4.0;
    arm.exempt = rep.perturbed && rho > gap / 8.0;
    if (i < thresholds.size() && thresholds[i]) arm.m0 = thresholds[i]->m0;

    const auto& visits = re.visit_times[i];
    for (std::uint64_t v = 2; v <= visits.size(); ++v) {
      const std::uint64_t t = visits[v - 1];
      LemmaCheck c;
      c.visit = v;
      c.time = t;
      c.radius = re.radius_at(t, i);
      c.precondition = c.radius <= gap / 4.0;
      if (c.precondition && !arm.first_visit_quarter_gap) arm.first_visit_quarter_gap = v;
      if (c.radius <= gap / 8.0 && !arm.first_visit_eighth_gap) arm.first_visit_eighth_gap = v;
      if (arm.exempt) continue;
      if (arm.m0) {
        if (v < *arm.m0 + 1) continue;
      } else if (!c.precondition) {
        ++arm.skipped;
        continue;
      }
      c.deviation_arm = std::fabs(re.estimate_at(t, i) - env.true_mean(i)) >= arm.threshold;
      c.deviation_star = std::fabs(re.estimate_at(t, g.i_star) - g.mu_star) >= arm.threshold;
      ++arm.checked;
      if (!c.holds()) {
        arm.failures.push_back(c);
        arm.pass = false;
      }
    }
    rep.checks += arm.checked;
    rep.all_pass = rep.all_pass && arm.pass;
    rep.arms.push_back(std::move(arm));
  }
  return rep;
}

bool pull_bound_holds(std::span<const std::uint64_t> pulls,
                      std::span<const std::optional<CollapseThreshold>> thresholds,
                      bool good_event) {
  if (!good_event) return true;
  for (std::size_t i = 0; i < pulls.size() && i < thresholds.size(); ++i) {
    if (thresholds[i] && pulls[i] > thresholds[i]->m0) return false;
  }
  return true;
}

TheoremReport check_theorem(const BanditTrace& trace, const Environment& env,
                            const Recomputation& re,
                            std::span<const std::optional<CollapseThreshold>> thresholds,
                            const GoodEventReport& good, double rho) {
  require_matching(trace, env);
  TheoremReport rep;
  rep.good_event = good.holds;
  const GapProfile g = env.gap_profile();
  const std::vector<std::uint64_t> pulls = trace.pull_counts();
  for (std::size_t i = 0; i < re.num_arms; ++i) {
    if (!(g.gaps[i] > 0.0)) continue;
    ArmTheorem a;
    a.arm = i;
    a.pulls = pulls[i];
    a.exempt = rho > g.gaps[i] / 8.0;
    if (i < thresholds.size() && thresholds[i]) a.m0 = thresholds[i]->m0;
    a.within_m0 = !a.m0 || a.pulls <= *a.m0;
    const auto& visits = re.visit_times[i];
    for (std::uint64_t v = 2; v <= visits.size(); ++v) {
      if (re.radius_at(visits[v - 1], i) <= g.gaps[i] / 4.0) ++a.collapsed_pulls;
    }
    rep.arms.push_back(a);
  }
  if (good.holds) {
    for (const ArmTheorem& a : rep.arms) rep.pass = rep.pass && (a.exempt || (a.within_m0 && a.collapsed_pulls == 0));
  }
  return rep;
}

RegretReport regret(std::span<const std::uint64_t> pulls, const Environment& env) {
  if (pulls.size() != env.num_arms()) throw InputError("pull counts do not match the environment");
  const GapProfile g = env.gap_profile();
  RegretReport rep;
  rep.pulls.assign(pulls.begin(), pulls.end());
  rep.horizon = std::accumulate(pulls.begin(), pulls.end(), std::uint64_t{0});
  for (std::size_t i = 0; i < pulls.size(); ++i) {
    rep.contribution.push_back(g.gaps[i] * static_cast<double>(pulls[i]));
    rep.regret += rep.contribution.back();
  }
  return rep;
}

RegretReport regret(const BanditTrace& trace, const Environment& env) {
  require_matching(trace, env);
  return regret(trace.pull_counts(), env);
}

ReplicationReport verify_trace(const BanditTrace& trace, const Environment& env,
                               const PolicyConfig& config) {
  const Recomputation re = recompute(trace, env, config);
  const auto thresholds = collapse_thresholds(config, env);
  ReplicationReport rep;
  rep.replication = trace.replication;
  rep.consistency = check_consistency(trace, re);
  rep.good_event = check_good_event(trace, env, re);
  rep.lemma_two = check_lemma_two(trace, env, config, re, thresholds);
  rep.theorem = check_theorem(trace, env, re, thresholds, rep.good_event,
                              config.perturbation ? config.perturbation->rho_t : 0.0);
  rep.regret = regret(trace, env);
  return rep;
}

// ---------------------------------------------------------------------------

bool AggregateReport::all_flags_pass() const {
  return deterministic_pass() && good_event_ok &&
         std::all_of(pulls_within_bound.begin(), pulls_within_bound.end(), [](bool b) { return b; });
}

AggregateReport aggregate(std::span<const ReplicationReport> reports,
                          std::span<const std::optional<CollapseThreshold>> thresholds,
                          double max_good_event_failure_frequency) {
  if (reports.empty()) throw InputError("aggregate needs at least one replication");
  AggregateReport agg;
  agg.replications = reports.size();
  const std::size_t k = reports.front().regret.pulls.size();
  const double n = static_cast<double>(reports.size());
  agg.mean_pulls.assign(k, 0.0);
  for (const ReplicationReport& r : reports) {
    agg.mean_regret += r.regret.regret;
    for (std::size_t i = 0; i < k; ++i) agg.mean_pulls[i] += static_cast<double>(r.regret.pulls[i]);
    if (!r.good_event.holds) ++agg.good_event_failures;
    agg.lemma_two_all_pass = agg.lemma_two_all_pass && r.lemma_two.all_pass;
    agg.theorem_all_pass = agg.theorem_all_pass && r.theorem.pass;
    agg.consistent = agg.consistent && r.consistency.consistent;
  }
  agg.mean_regret /= n;
  for (double& m : agg.mean_pulls) m /= n;
  if (reports.size() > 1) {
    double ss = 0.0;
    for (const ReplicationReport& r : reports) ss += (r.regret.regret - agg.mean_regret) * (r.regret.regret - agg.mean_regret);
    agg.std_regret = std::sqrt(ss / (n - 1.0));
  }
  agg.pull_bound.assign(k, std::nullopt);
  agg.pulls_within_bound.assign(k, true);
  for (std::size_t i = 0; i < k && i < thresholds.size(); ++i) {
    if (!thresholds[i]) continue;
    agg.pull_bound[i] = thresholds[i]->m0 + 1;
    agg.pulls_within_bound[i] = agg.mean_pulls[i] <= static_cast<double>(*agg.pull_bound[i]);
  }
  agg.good_event_failure_frequency = static_cast<double>(agg.good_event_failures) / n;
  agg.max_good_event_failure_frequency = max_good_event_failure_frequency;
  agg.good_event_ok = agg.good_event_failure_frequency <= max_good_event_failure_frequency;
  return agg;
}

// ---------------------------------------------------------------------------

namespace {

// Estimates after m = 1..m_max samples of one simulated path.
void simulate_path(const EstimatorConfig& estimator, const RadiusSpec& spec, const Environment& env,
                   std::size_t arm, std::uint64_t m_max, std::uint64_t path, std::uint64_t seed,
                   std::vector<double>& est, std::vector<double>* rad) {
  MeanVarState stats;
  SampleBuffer buffer;
  const bool buffered = estimator.kind == EstimatorKind::MedianOfMeans ||
                        estimator.kind == EstimatorKind::TruncatedMean;
  for (std::uint64_t n = 0; n < m_max; ++n) {
    CounterRng rng(seed, path, kCoverageStream + arm, n);
    const double x = env.sample_reward(arm, rng);
    stats = update_mean_var(stats, x);
    if (buffered) buffer.push(x);
    est[n] = per_arm_value(estimator, stats, buffer, n + 1);
    if (rad != nullptr) (*rad)[n] = per_arm_radius(spec, n + 1, stats.variance());
  }
}

void require_per_arm(const EstimatorConfig& estimator, const RadiusSpec& spec) {
  if (!is_per_arm(estimator.kind) || is_time_indexed(spec.kind)) {
    throw InputError("coverage estimation needs a per-arm estimator and radius");
  }
  spec.validate();
}

}  // namespace

CoverageResult coverage_estimate(const EstimatorConfig& estimator, const RadiusSpec& spec,
                                 const Environment& env, std::size_t arm, std::uint64_t m_max,
                                 std::uint64_t reps, std::uint64_t seed) {
  require_per_arm(estimator, spec);
  if (reps < 1 || m_max < 1) throw InputError("coverage needs reps >= 1 and m_max >= 1");
  const double mu = env.true_mean(arm);
  const bool table = envelope_is_exact(spec.kind);
  std::vector<double> est(m_max), rad(m_max);
  if (table) radius_table(spec, 1, rad);
  std::vector<std::uint64_t> pointwise(m_max, 0);

  CoverageResult res;
  res.reps = reps;
  res.m_max = m_max;
  for (std::uint64_t p = 0; p < reps; ++p) {
    simulate_path(estimator, spec, env, arm, m_max, p, seed, est, table ? nullptr : &rad);
    const std::span<const double> e(est), r(rad);
    std::size_t pos = simd::first_exceedance(e, mu, r);
    if (pos < m_max) ++res.violating_paths;
    while (pos < m_max) {
      ++pointwise[pos];
      pos += 1 + simd::first_exceedance(e.subspan(pos + 1), mu, r.subspan(pos + 1));
    }
  }
  const double n = static_cast<double>(reps);
  res.frequency = static_cast<double>(res.violating_paths) / n;
  res.max_pointwise_frequency =
      static_cast<double>(*std::max_element(pointwise.begin(), pointwise.end())) / n;
  return res;
}

double calibrate_heavy_tail_c(const EstimatorConfig& estimator, const RadiusSpec& spec,
                              const Environment& env, std::size_t arm, std::uint64_t m_max,
                              std::uint64_t reps, std::uint64_t seed, double target) {
  require_per_arm(estimator, spec);
  if (spec.kind != RadiusKind::HeavyTail) throw InputError("calibration needs a heavy-tail spec");
  if (reps < 1 || m_max < 1) throw InputError("calibration needs reps >= 1 and m_max >= 1");
  const double mu = env.true_mean(arm);
  const double l = spec.log_inv_delta();
  std::vector<double> est(m_max);
  std::vector<double> required(reps, 0.0);
  for (std::uint64_t p = 0; p < reps; ++p) {
    simulate_path(estimator, spec, env, arm, m_max, p, seed, est, nullptr);
    double need = 0.0;
    for (std::uint64_t m = 1; m <= m_max; ++m) {
      const double md = static_cast<double>(m);
      const double excess = std::fabs(est[m - 1] - mu) - spec.d_heavy * l / md;
      if (excess > 0.0) need = std::max(need, excess / std::sqrt(l / md));
    }
    required[p] = need;
  }
  std::sort(required.begin(), required.end(), std::greater<>());
  const auto allowed = static_cast<std::uint64_t>(std::floor(target * static_cast<double>(reps)));
  if (allowed >= reps) return 0.0;
  // Nudge past rounding between C sqrt(L/m) and sqrt(C^2 L / m).
  return required[allowed] * (1.0 + 1e-9);
}

}  // namespace optimist
