#include "optimist/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "optimist/errors.hpp"
#include "optimist/simd/kernels.hpp"

namespace optimist {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(PerturbDistribution d) {
  switch (d) {
    case PerturbDistribution::UniformSymmetric: return "uniform";
    case PerturbDistribution::TruncatedGaussian: return "truncated_gaussian";
  }
  return "unknown";
}

PerturbDistribution perturb_distribution_from_string(std::string_view name) {
  if (name == "uniform") return PerturbDistribution::UniformSymmetric;
  if (name == "truncated_gaussian") return PerturbDistribution::TruncatedGaussian;
  throw InputError("unknown perturbation distribution '" + std::string(name) + "'");
}

std::vector<double> draw_perturbations(const PerturbSpec& spec, std::size_t num_arms,
                                       CounterRng& rng) {
  std::vector<double> xi(num_arms, 0.0);
  if (spec.rho_t == 0.0) return xi;
  switch (spec.distribution) {
    case PerturbDistribution::UniformSymmetric:
      for (double& v : xi) v = spec.rho_t * (2.0 * rng.uniform() - 1.0);
      break;
    case PerturbDistribution::TruncatedGaussian: {
      std::normal_distribution<double> z(0.0, 1.0);
      for (double& v : xi) v = std::clamp(spec.scale * z(rng), -spec.rho_t, spec.rho_t);
      break;
    }
  }
  return xi;
}

void PolicyConfig::validate(const Environment& env) const {
  if (radius.size() != env.num_arms()) {
    throw InputError("policy needs one radius spec per arm");
  }
  const RadiusKind kind = radius.front().kind;
  for (const RadiusSpec& r : radius) {
    if (r.kind != kind) throw InputError("all arms must share one radius kind");
    r.validate();
  }
  const EstimatorKind est = estimator.kind;
  if (kind == RadiusKind::LinUcb && est != EstimatorKind::Ridge) {
    throw InputError("linucb radius requires the ridge estimator");
  }
  if (kind == RadiusKind::GpUcb && est != EstimatorKind::GpPosterior) {
    throw InputError("gpucb radius requires the gp estimator");
  }
  if (!is_per_arm(est) && kind != RadiusKind::LinUcb && kind != RadiusKind::GpUcb) {
    throw InputError("ridge/gp estimators pair only with linucb/gpucb radii");
  }
  if (perturbation) {
    if (!(perturbation->rho_t >= 0.0) || !(perturbation->scale >= 0.0)) {
      throw InputError("perturbation rho and scale must be >= 0");
    }
  }
}

std::size_t select_arm(std::span<const double> indices) {
  if (indices.empty()) throw InputError("select_arm needs at least one index");
  std::vector<double> zeros(indices.size(), 0.0), out(indices.size());
  const std::size_t best = simd::optimistic_argmax(indices, zeros, zeros, out);
  if (best >= indices.size()) throw InternalError("non-finite optimistic index");
  return best;
}

StepRecord BanditTrace::step(std::size_t t) const {
  StepRecord r;
  r.time = t;
  r.chosen_arm = arm.at(t);
  r.reward = reward.at(t);
  r.pull_count_before = pull_count_before.at(t);
  const auto copy = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
  r.estimate = copy(estimates_at(t));
  r.radius = copy(radii_at(t));
  r.index = copy(indices_at(t));
  r.xi = copy(xi_at(t));
  return r;
}

std::vector<std::uint64_t> BanditTrace::pull_counts() const {
  std::vector<std::uint64_t> n(num_arms, 0);
  for (std::uint32_t a : arm) ++n[a];
  return n;
}

bool BanditTrace::same_steps(const BanditTrace& o) const {
  return num_arms == o.num_arms && arm == o.arm && pull_count_before == o.pull_count_before &&
         same_bits(reward, o.reward) && same_bits(estimate, o.estimate) &&
         same_bits(radius, o.radius) && same_bits(index, o.index) && same_bits(xi, o.xi);
}

// ---------------------------------------------------------------------------

OptimisticPolicy::OptimisticPolicy(PolicyConfig config, const Environment& env,
                                   std::uint64_t seed, std::uint64_t replication)
    : config_(std::move(config)),
      env_(&env),
      seed_(seed),
      replication_(replication),
      pulls_(env.num_arms(), 0),
      bank_(config_.estimator, env),
      est_(env.num_arms()),
      rad_(env.num_arms()),
      idx_(env.num_arms()),
      xi_(env.num_arms(), 0.0) {
  config_.validate(env);
}

void OptimisticPolicy::compute_indices() {
  const std::size_t k = pulls_.size();
  const RadiusKind kind = config_.radius_kind();
  for (std::size_t i = 0; i < k; ++i) {
    const RadiusSpec& spec = config_.radius[i];
    switch (kind) {
      case RadiusKind::LinUcb:
        est_[i] = bank_.value(i);
        rad_[i] = linucb_radius(spec.alpha_t, bank_.width(i));
        break;
      case RadiusKind::GpUcb:
        est_[i] = bank_.value(i);
        rad_[i] = gpucb_radius(gpucb_beta_at(spec, time_ + 1), bank_.width(i));
        break;
      default:
        if (pulls_[i] == 0) {
          est_[i] = kNaN;
          rad_[i] = kInf;
        } else {
          est_[i] = bank_.value(i);
          rad_[i] = per_arm_radius(spec, pulls_[i], bank_.stats(i).variance());
        }
    }
  }
}

OptimisticPolicy::Decision OptimisticPolicy::decide() {
  const std::size_t k = pulls_.size();
  compute_indices();
  std::size_t chosen;
  if (time_ < k) {
    std::fill(xi_.begin(), xi_.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) idx_[i] = (est_[i] + rad_[i]) + xi_[i];
    chosen = static_cast<std::size_t>(time_);
  } else {
    if (config_.perturbation) {
      CounterRng rng(seed_, replication_, kPerturbStream, time_);
      xi_ = draw_perturbations(*config_.perturbation, k, rng);
    }
    chosen = simd::optimistic_argmax(est_, rad_, xi_, idx_);
    if (chosen >= k) throw InternalError("non-finite optimistic index at t=" + std::to_string(time_));
  }
  const std::uint64_t before = pulls_[chosen];
  CounterRng rng(seed_, replication_, chosen, before);
  const double reward = env_->sample_reward(chosen, rng);
  bank_.observe(chosen, reward);
  ++pulls_[chosen];
  ++time_;
  return {chosen, reward, before};
}

StepRecord OptimisticPolicy::step() {
  const std::uint64_t t = time_;
  const Decision d = decide();
  return StepRecord{t, d.arm, d.reward, d.pulls_before, est_, rad_, idx_, xi_};
}

void OptimisticPolicy::step_into(BanditTrace& trace) {
  const Decision d = decide();
  trace.arm.push_back(static_cast<std::uint32_t>(d.arm));
  trace.reward.push_back(d.reward);
  trace.pull_count_before.push_back(d.pulls_before);
  trace.estimate.insert(trace.estimate.end(), est_.begin(), est_.end());
  trace.radius.insert(trace.radius.end(), rad_.begin(), rad_.end());
  trace.index.insert(trace.index.end(), idx_.begin(), idx_.end());
  trace.xi.insert(trace.xi.end(), xi_.begin(), xi_.end());
}

BanditTrace run_episode(const PolicyConfig& config, const Environment& env, std::uint64_t horizon,
                        std::uint64_t seed, std::uint64_t replication) {
  const std::size_t k = env.num_arms();
  if (horizon < k) throw InputError("horizon must be at least the number of arms");
  OptimisticPolicy policy(config, env, seed, replication);
  BanditTrace trace;
  trace.num_arms = k;
  trace.horizon = horizon;
  trace.seed = seed;
  trace.replication = replication;
  trace.env_id = env.snapshot_id();
  trace.arm.reserve(horizon);
  trace.reward.reserve(horizon);
  trace.pull_count_before.reserve(horizon);
  for (auto* col : {&trace.estimate, &trace.radius, &trace.index, &trace.xi}) col->reserve(horizon * k);
  for (std::uint64_t t = 0; t < horizon; ++t) policy.step_into(trace);
  return trace;
}

EpisodeSummary run_episode_counts(const PolicyConfig& config, const Environment& env,
                                  std::uint64_t horizon, std::uint64_t seed,
                                  std::uint64_t replication) {
  if (horizon < env.num_arms()) throw InputError("horizon must be at least the number of arms");
  OptimisticPolicy policy(config, env, seed, replication);
  for (std::uint64_t t = 0; t < horizon; ++t) policy.advance();
  return {policy.pull_counts()};
}

}  // namespace optimist
