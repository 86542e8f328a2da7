#pragma once

// Trace verification.
//
// Everything here recomputes estimates and radii from the raw (arm, reward)
// sequence of a trace; the recorded estimate/radius/index columns are only
// compared against the recomputation, never trusted.
//
// Per-arm estimators are indexed by pull count m. Ridge and GP estimators
// are indexed by decision time t: their "estimate" is the predicted mean at
// the arm and their radius is r_t(i).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optimist/env.hpp"
#include "optimist/policy.hpp"
#include "optimist/radius.hpp"

namespace optimist {

struct Recomputation {
  std::size_t num_arms = 0;
  bool time_indexed = false;
  // Per-arm kinds: [arm][m - 1] = value after m pulls.
  std::vector<std::vector<double>> estimate_by_count;
  std::vector<std::vector<double>> radius_by_count;
  // Decision-time values, T x K row-major (NaN / +inf before a first pull).
  std::vector<double> estimate;
  std::vector<double> radius;
  // [arm][v - 1] = time of the arm's v-th pull.
  std::vector<std::vector<std::uint64_t>> visit_times;

  double estimate_at(std::uint64_t t, std::size_t arm) const { return estimate[t * num_arms + arm]; }
  double radius_at(std::uint64_t t, std::size_t arm) const { return radius[t * num_arms + arm]; }
};

Recomputation recompute(const BanditTrace& trace, const Environment& env,
                        const PolicyConfig& config);

struct ConsistencyReport {
  bool consistent = true;
  std::uint64_t mismatches = 0;
  std::string first_mismatch;
};

// Recorded columns vs recomputation (tolerance 1e-9), index = est + rad + xi,
// chosen arm = lowest argmax after round-robin, pull_count_before.
ConsistencyReport check_consistency(const BanditTrace& trace, const Recomputation& re,
                                    double tolerance = 1e-9);

struct Violation {
  std::size_t arm = 0;
  std::uint64_t m = 0;  // pull count, or decision time when time-indexed
  double deviation = 0.0;
  double radius = 0.0;
};

struct GoodEventReport {
  bool holds = true;
  bool time_indexed = false;
  std::vector<Violation> violations;
};

// Violations are strict: |estimate - mean| > radius.
GoodEventReport check_good_event(const BanditTrace& trace, const Environment& env,
                                 const Recomputation& re);
GoodEventReport check_good_event(const BanditTrace& trace, const Environment& env,
                                 const PolicyConfig& config);

// True iff radius(spec, m0) <= gap / 4.
bool check_collapse(const RadiusSpec& spec, double gap, std::uint64_t m0);

// Per-arm m0 used by the pull bound. Present for positive-gap arms whose
// radius is provably dominated by its sqrt/linear envelope: canonical, UCB
// and heavy-tail radii always; UCB-V on [0,1] rewards with sigma_sq >= 1/4.
std::vector<std::optional<CollapseThreshold>> collapse_thresholds(const PolicyConfig& config,
                                                                  const Environment& env);

struct LemmaCheck {
  std::uint64_t visit = 0;
  std::uint64_t time = 0;
  double radius = 0.0;
  bool precondition = true;  // r_i(m - 1) <= gap / 4
  bool deviation_arm = false;
  bool deviation_star = false;
  bool holds() const { return precondition && (deviation_arm || deviation_star); }
};

struct ArmLemmaReport {
  std::size_t arm = 0;
  double gap = 0.0;
  double threshold = 0.0;  // gap/4, or gap/8 under perturbation
  std::optional<std::uint64_t> m0;
  bool exempt = false;     // perturbation too large for this gap
  std::uint64_t checked = 0;
  std::uint64_t skipped = 0;  // visits without a collapsed radius (data-dependent radii)
  std::vector<LemmaCheck> failures;
  std::optional<std::uint64_t> first_visit_quarter_gap;  // first visit with r <= gap/4
  std::optional<std::uint64_t> first_visit_eighth_gap;   // first visit with r <= gap/8
  bool pass = true;
};

struct LemmaTwoReport {
  bool perturbed = false;
  std::vector<ArmLemmaReport> arms;
  std::uint64_t checks = 0;
  bool all_pass = true;
};

// For each suboptimal arm i and every visit m > m0 (every visit whose radius
// has collapsed below gap/4, when no closed-form m0 exists), at least one of
// |est_i(m-1) - mu_i| >= thr and |est_star - mu_star| >= thr must hold, with
// est_star the optimal arm's estimate at the same decision.
LemmaTwoReport check_lemma_two(const BanditTrace& trace, const Environment& env,
                               const PolicyConfig& config, const Recomputation& re,
                               std::span<const std::optional<CollapseThreshold>> thresholds);

struct ArmTheorem {
  std::size_t arm = 0;
  std::uint64_t pulls = 0;
  std::optional<std::uint64_t> m0;
  bool within_m0 = true;
  std::uint64_t collapsed_pulls = 0;  // pulls made while r <= gap/4
  bool exempt = false;                // perturbation bound rho > gap/8
};

struct TheoremReport {
  bool good_event = true;
  bool pass = true;  // vacuously true off the good event
  std::vector<ArmTheorem> arms;
};

// On the good event: N_i(T) <= m0 for arms with a threshold, and no
// suboptimal arm is ever pulled once its radius is at most gap/4. Arms with
// gap < 8 rho are not covered when the index is perturbed.
TheoremReport check_theorem(const BanditTrace& trace, const Environment& env,
                            const Recomputation& re,
                            std::span<const std::optional<CollapseThreshold>> thresholds,
                            const GoodEventReport& good, double rho = 0.0);

// Pure pull-count form: good_event => pulls[i] <= m0[i] wherever m0 is set.
bool pull_bound_holds(std::span<const std::uint64_t> pulls,
                      std::span<const std::optional<CollapseThreshold>> thresholds,
                      bool good_event);

struct RegretReport {
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> pulls;
  std::vector<double> contribution;  // gap_i * N_i(T)
  double regret = 0.0;
};

RegretReport regret(std::span<const std::uint64_t> pulls, const Environment& env);
RegretReport regret(const BanditTrace& trace, const Environment& env);

// Everything the harness records for one replication.
struct ReplicationReport {
  std::uint64_t replication = 0;
  ConsistencyReport consistency;
  GoodEventReport good_event;
  LemmaTwoReport lemma_two;
  TheoremReport theorem;
  RegretReport regret;

  bool deterministic_pass() const {
    return consistency.consistent && lemma_two.all_pass && theorem.pass;
  }
};

ReplicationReport verify_trace(const BanditTrace& trace, const Environment& env,
                               const PolicyConfig& config);

struct AggregateReport {
  std::size_t replications = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;  // sample standard deviation, 0 for one replication
  std::vector<double> mean_pulls;
  std::vector<std::optional<std::uint64_t>> pull_bound;  // m0 + 1
  std::vector<bool> pulls_within_bound;
  std::uint64_t good_event_failures = 0;
  double good_event_failure_frequency = 0.0;
  double max_good_event_failure_frequency = 1.0;
  bool good_event_ok = true;
  bool lemma_two_all_pass = true;
  bool theorem_all_pass = true;
  bool consistent = true;

  bool deterministic_pass() const { return lemma_two_all_pass && theorem_all_pass && consistent; }
  bool all_flags_pass() const;
};

AggregateReport aggregate(std::span<const ReplicationReport> reports,
                          std::span<const std::optional<CollapseThreshold>> thresholds,
                          double max_good_event_failure_frequency);

// ---------------------------------------------------------------------------
// Monte-Carlo coverage of a (estimator, radius) pairing on one arm.

struct CoverageResult {
  std::uint64_t reps = 0;
  std::uint64_t m_max = 0;
  std::uint64_t violating_paths = 0;
  double frequency = 0.0;                 // P(exists m <= m_max: |est - mu| > r(m))
  double max_pointwise_frequency = 0.0;   // max over m of P(|est(m) - mu| > r(m))
};

// Path p draws its samples from CounterRng(seed, p, kCoverageStream + arm, n).
CoverageResult coverage_estimate(const EstimatorConfig& estimator, const RadiusSpec& radius,
                                 const Environment& env, std::size_t arm, std::uint64_t m_max,
                                 std::uint64_t reps, std::uint64_t seed);

// Smallest C (with spec.d_heavy held fixed) at which at most
// floor(target * reps) of the simulated paths leave the heavy-tail radius.
double calibrate_heavy_tail_c(const EstimatorConfig& estimator, const RadiusSpec& spec,
                              const Environment& env, std::size_t arm, std::uint64_t m_max,
                              std::uint64_t reps, std::uint64_t seed, double target);

}  // namespace optimist
