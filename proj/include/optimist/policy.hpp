#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "optimist/env.hpp"
#include "optimist/estimators.hpp"
#include "optimist/radius.hpp"
#include "optimist/rng.hpp"

namespace optimist {

enum class PerturbDistribution { UniformSymmetric, TruncatedGaussian };

std::string_view to_string(PerturbDistribution d);
PerturbDistribution perturb_distribution_from_string(std::string_view name);

// Bounded index perturbations: every draw satisfies |xi| <= rho_t.
struct PerturbSpec {
  double rho_t = 0.0;
  PerturbDistribution distribution = PerturbDistribution::UniformSymmetric;
  double scale = 1.0;  // std of the Gaussian before truncation

  bool operator==(const PerturbSpec&) const = default;
};

// K draws for one time step. rho_t == 0 yields exact zeros without
// consuming the stream.
std::vector<double> draw_perturbations(const PerturbSpec& spec, std::size_t num_arms,
                                       CounterRng& rng);

struct PolicyConfig {
  EstimatorConfig estimator;
  std::vector<RadiusSpec> radius;  // one per arm, all of the same kind
  std::optional<PerturbSpec> perturbation;

  RadiusKind radius_kind() const { return radius.front().kind; }
  // Throws InputError on an estimator/radius/environment mismatch.
  void validate(const Environment& env) const;
  bool operator==(const PolicyConfig&) const = default;
};

// Lowest index attaining the maximum; InternalError on a non-finite entry.
std::size_t select_arm(std::span<const double> indices);

struct StepRecord {
  std::uint64_t time = 0;
  std::size_t chosen_arm = 0;
  double reward = 0.0;
  std::uint64_t pull_count_before = 0;
  std::vector<double> estimate;
  std::vector<double> radius;
  std::vector<double> index;
  std::vector<double> xi;

  bool operator==(const StepRecord&) const = default;
};

// Full record of one run, stored column-wise. Per-arm columns are T x K
// row-major. Before an arm's first pull its per-arm estimate is NaN and its
// radius +inf.
struct BanditTrace {
  std::size_t num_arms = 0;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t env_id = 0;

  std::vector<std::uint32_t> arm;
  std::vector<double> reward;
  std::vector<std::uint64_t> pull_count_before;
  std::vector<double> estimate;
  std::vector<double> radius;
  std::vector<double> index;
  std::vector<double> xi;

  std::size_t steps() const { return arm.size(); }
  std::span<const double> estimates_at(std::size_t t) const { return row(estimate, t); }
  std::span<const double> radii_at(std::size_t t) const { return row(radius, t); }
  std::span<const double> indices_at(std::size_t t) const { return row(index, t); }
  std::span<const double> xi_at(std::size_t t) const { return row(xi, t); }
  StepRecord step(std::size_t t) const;
  std::vector<std::uint64_t> pull_counts() const;

  // Same step data, ignoring run metadata.
  bool same_steps(const BanditTrace& other) const;

 private:
  std::span<const double> row(const std::vector<double>& col, std::size_t t) const {
    return std::span<const double>(col).subspan(t * num_arms, num_arms);
  }
};

// The optimistic index policy: round-robin for the first K steps, then
// argmax of estimate + radius (+ perturbation).
class OptimisticPolicy {
 public:
  OptimisticPolicy(PolicyConfig config, const Environment& env, std::uint64_t seed,
                   std::uint64_t replication);

  StepRecord step();
  // Appends the step to `trace` instead of materialising a StepRecord.
  void step_into(BanditTrace& trace);
  // Runs one step without recording anything.
  void advance() { decide(); }

  std::uint64_t time() const { return time_; }
  const std::vector<std::uint64_t>& pull_counts() const { return pulls_; }
  const EstimatorBank& estimators() const { return bank_; }

 private:
  struct Decision {
    std::size_t arm;
    double reward;
    std::uint64_t pulls_before;
  };
  Decision decide();
  void compute_indices();

  PolicyConfig config_;
  const Environment* env_;
  std::uint64_t seed_;
  std::uint64_t replication_;
  std::uint64_t time_ = 0;
  std::vector<std::uint64_t> pulls_;
  EstimatorBank bank_;
  std::vector<double> est_, rad_, idx_, xi_;
};

struct EpisodeSummary {
  std::vector<std::uint64_t> pull_counts;
};

BanditTrace run_episode(const PolicyConfig& config, const Environment& env, std::uint64_t horizon,
                        std::uint64_t seed, std::uint64_t replication);
EpisodeSummary run_episode_counts(const PolicyConfig& config, const Environment& env,
                                  std::uint64_t horizon, std::uint64_t seed,
                                  std::uint64_t replication);

}  // namespace optimist
