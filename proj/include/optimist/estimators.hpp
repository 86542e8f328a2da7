#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "optimist/env.hpp"

namespace optimist {

// ---------------------------------------------------------------------------
// Running mean / variance (Welford). Variance is the population form m2/m.

struct MeanVarState {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  double variance() const { return count <= 1 ? 0.0 : m2 / static_cast<double>(count); }
  bool operator==(const MeanVarState&) const = default;
};

MeanVarState update_mean_var(MeanVarState state, double x);

// ---------------------------------------------------------------------------
// Raw samples of one arm in pull order, with running prefix sums so block
// means cost O(1) each.

class SampleBuffer {
 public:
  void push(double x);
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::span<const double> samples() const { return samples_; }
  // Sum of samples [begin, end).
  double range_sum(std::size_t begin, std::size_t end) const {
    return prefix_[end] - prefix_[begin];
  }
  double mean() const;

 private:
  std::vector<double> samples_;
  std::vector<double> prefix_{0.0};
};

// Median of the means of `num_blocks` contiguous blocks; the first
// size % num_blocks blocks hold one extra sample. Uses the first `prefix`
// samples when given (so a verifier can evaluate every prefix length).
double median_of_means(const SampleBuffer& buffer, std::size_t num_blocks);
double median_of_means(const SampleBuffer& buffer, std::size_t num_blocks, std::size_t prefix);

// Mean of samples clamped to [-threshold, threshold].
double truncated_mean(const SampleBuffer& buffer, double threshold);
double truncated_mean(const SampleBuffer& buffer, double threshold, std::size_t prefix);

// ---------------------------------------------------------------------------
// Ridge regression with a maintained inverse of V = lambda I + sum x x^T.

struct RidgePrediction {
  double mean = 0.0;   // x^T theta_hat
  double width = 0.0;  // sqrt(x^T V^{-1} x)
};

class RidgeState {
 public:
  static constexpr std::uint64_t kRefactorEvery = 256;

  RidgeState(std::size_t dim, double lambda);

  void update(std::span<const double> x, double y);
  RidgePrediction predict(std::span<const double> x) const;

  std::size_t dim() const { return dim_; }
  double lambda() const { return lambda_; }
  std::uint64_t updates() const { return updates_; }
  // Row-major d x d.
  std::span<const double> v_matrix() const { return v_; }
  std::span<const double> v_inverse() const { return v_inv_; }
  std::span<const double> xty() const { return xty_; }
  std::span<const double> theta_hat() const { return theta_; }

 private:
  void refactor();

  std::size_t dim_;
  double lambda_;
  std::uint64_t updates_ = 0;
  std::vector<double> v_;
  std::vector<double> v_inv_;
  std::vector<double> xty_;
  std::vector<double> theta_;
  std::vector<double> scratch_;
};

// ---------------------------------------------------------------------------
// Gaussian-process (kernel ridge) posterior over a finite set of arm points.
//
// Repeated observations at one arm enter the posterior only through their
// count n_a and mean ybar_a, so the exact noisy-GP posterior is solved over
// the distinct observed arms with per-arm noise variance sigma^2 / n_a.

class GpPosterior {
 public:
  GpPosterior(KernelSpec kernel, std::vector<std::vector<double>> arm_points,
              double noise_variance);

  void update(std::size_t arm, double y);

  std::size_t num_arms() const { return points_.size(); }
  double mean(std::size_t arm) const { return mean_.at(arm); }
  double stddev(std::size_t arm) const { return std_.at(arm); }
  double noise_variance() const { return noise_variance_; }
  const KernelSpec& kernel() const { return kernel_; }
  const std::vector<std::pair<std::size_t, double>>& observed() const { return observed_; }

 private:
  void recompute();

  KernelSpec kernel_;
  std::vector<std::vector<double>> points_;
  double noise_variance_;
  std::vector<double> gram_;
  std::vector<std::pair<std::size_t, double>> observed_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> sums_;
  std::vector<double> mean_;
  std::vector<double> std_;
};

// ---------------------------------------------------------------------------
// Uniform estimator access for the policy.

enum class EstimatorKind { EmpiricalMean, MedianOfMeans, TruncatedMean, Ridge, GpPosterior };

std::string_view to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(std::string_view name);
bool is_per_arm(EstimatorKind kind);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::EmpiricalMean;
  std::size_t mom_blocks = 0;      // 0: ceil(8 log(1/delta)), capped at the sample count
  double truncation_scale = 1.0;   // v in tau(m) = sqrt(v m / log(1/delta))
  double log_inv_delta = 1.0;      // log(1/delta) used by the two schedules above
  double ridge_lambda = 1.0;
  double gp_noise_variance = 1.0;

  bool operator==(const EstimatorConfig&) const = default;
};

std::size_t mom_block_count(const EstimatorConfig& config, std::size_t m);
double truncation_threshold(const EstimatorConfig& config, std::size_t m);

// All estimator state a policy needs. Per-arm running moments are kept for
// every kind because data-dependent radii read the empirical variance.
class EstimatorBank {
 public:
  EstimatorBank(const EstimatorConfig& config, const Environment& env);

  void observe(std::size_t arm, double reward);

  // Current estimate of the arm's mean. Per-arm kinds throw
  // NotInitializedError before the arm's first observation.
  double value(std::size_t arm) const;
  // Ridge: sqrt(x^T V^{-1} x). GP: posterior std. Otherwise 0.
  double width(std::size_t arm) const;

  const MeanVarState& stats(std::size_t arm) const { return stats_.at(arm); }
  const SampleBuffer& buffer(std::size_t arm) const { return buffers_.at(arm); }
  const EstimatorConfig& config() const { return config_; }
  std::size_t num_arms() const { return stats_.size(); }
  const RidgeState* ridge() const { return ridge_.empty() ? nullptr : &ridge_.front(); }
  const GpPosterior* gp() const { return gp_.empty() ? nullptr : &gp_.front(); }

 private:
  EstimatorConfig config_;
  std::vector<std::vector<double>> features_;
  std::vector<MeanVarState> stats_;
  std::vector<SampleBuffer> buffers_;
  std::vector<RidgeState> ridge_;
  std::vector<GpPosterior> gp_;
};

// Estimate of a per-arm kind from the first `m` samples of a buffer, with
// the running moments `stats` standing for the same m samples.
double per_arm_value(const EstimatorConfig& config, const MeanVarState& stats,
                     const SampleBuffer& buffer, std::size_t m);

}  // namespace optimist
