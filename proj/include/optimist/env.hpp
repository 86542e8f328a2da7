#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "optimist/rng.hpp"

namespace optimist {

enum class EnvKind {
  Bernoulli,
  BoundedUniform,
  Gaussian,
  HeteroskedasticGaussian,
  HeavyTailStudentT,
  HeavyTailPareto,
  LinearModel,
  RkhsFinite,
};

std::string_view to_string(EnvKind kind);
EnvKind env_kind_from_string(std::string_view name);

struct ArmModel {
  double mean = 0.0;
  double scale = 0.0;                 // noise scale; half-width for BoundedUniform
  std::optional<double> tail_param;   // Student-t dof or Pareto shape, > 2

  bool operator==(const ArmModel&) const = default;
};

struct KernelSpec {
  enum class Family { Rbf };
  Family family = Family::Rbf;
  double lengthscale = 1.0;
  double signal_variance = 1.0;

  double operator()(std::span<const double> x, std::span<const double> y) const;
  bool operator==(const KernelSpec&) const = default;
};

struct LinearParams {
  std::vector<double> theta_star;
  std::vector<std::vector<double>> features;
  double noise_scale = 0.0;

  bool operator==(const LinearParams&) const = default;
};

struct RkhsParams {
  std::vector<std::vector<double>> arm_points;
  KernelSpec kernel;
  std::vector<double> f_values;
  double noise_scale = 0.0;

  bool operator==(const RkhsParams&) const = default;
};

struct GapProfile {
  double mu_star = 0.0;
  std::size_t i_star = 0;  // lowest index attaining mu_star
  std::vector<double> gaps;

  // Smallest strictly positive gap, or 0 if every arm is optimal.
  double min_positive_gap() const;
};

// Ground-truth reward model. Immutable after construction, so one instance
// can be shared by concurrent replications.
class Environment {
 public:
  static Environment bernoulli(std::vector<double> means);
  static Environment bounded_uniform(std::vector<double> means, std::vector<double> half_widths);
  static Environment gaussian(std::vector<double> means, double scale);
  static Environment heteroskedastic(std::vector<double> means, std::vector<double> scales);
  static Environment student_t(std::vector<double> means, std::vector<double> scales,
                               double dof = 2.5);
  static Environment pareto(std::vector<double> means, std::vector<double> scales, double shape);
  static Environment linear(std::vector<double> theta_star,
                            std::vector<std::vector<double>> features, double noise_scale);
  static Environment rkhs(std::vector<std::vector<double>> arm_points, KernelSpec kernel,
                          std::vector<double> f_values, double noise_scale);

  EnvKind kind() const { return kind_; }
  std::size_t num_arms() const { return arms_.size(); }
  const std::vector<ArmModel>& arms() const { return arms_; }
  const LinearParams* linear_params() const { return linear_ ? &*linear_ : nullptr; }
  const RkhsParams* rkhs_params() const { return rkhs_ ? &*rkhs_ : nullptr; }
  bool is_bounded() const {
    return kind_ == EnvKind::Bernoulli || kind_ == EnvKind::BoundedUniform;
  }

  double true_mean(std::size_t arm) const;
  double sample_reward(std::size_t arm, CounterRng& rng) const;
  GapProfile gap_profile() const;

  // Stable hash of every field; identifies the environment in trace headers.
  std::uint64_t snapshot_id() const;

  bool operator==(const Environment&) const = default;

 private:
  Environment(EnvKind kind, std::vector<ArmModel> arms);
  void check_arm(std::size_t arm) const;

  EnvKind kind_;
  std::vector<ArmModel> arms_;
  std::optional<LinearParams> linear_;
  std::optional<RkhsParams> rkhs_;
};

// Symmetric Gram matrix of `kernel` over `points`, row-major.
std::vector<double> gram_matrix(const KernelSpec& kernel,
                                const std::vector<std::vector<double>>& points);

// Smallest eigenvalue of the Gram matrix; construction rejects < -1e-10.
double gram_min_eigenvalue(const KernelSpec& kernel,
                           const std::vector<std::vector<double>>& points);

}  // namespace optimist
