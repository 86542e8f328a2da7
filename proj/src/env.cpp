#include "optimist/env.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "optimist/errors.hpp"

namespace optimist {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

struct Fnv {
  std::uint64_t h = kFnvOffset;
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= kFnvPrime;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
};

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InputError(std::string(what) + " must be finite");
}

void require_arms(std::size_t k) {
  if (k < 2) throw InputError("environment needs at least 2 arms");
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InputError(std::string(what) + " length must equal the number of arms");
}

}  // namespace

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Bernoulli: return "bernoulli";
    case EnvKind::BoundedUniform: return "bounded_uniform";
    case EnvKind::Gaussian: return "gaussian";
    case EnvKind::HeteroskedasticGaussian: return "heteroskedastic_gaussian";
    case EnvKind::HeavyTailStudentT: return "student_t";
    case EnvKind::HeavyTailPareto: return "pareto";
    case EnvKind::LinearModel: return "linear";
    case EnvKind::RkhsFinite: return "rkhs";
  }
  return "unknown";
}

EnvKind env_kind_from_string(std::string_view name) {
  for (EnvKind k : {EnvKind::Bernoulli, EnvKind::BoundedUniform, EnvKind::Gaussian,
                    EnvKind::HeteroskedasticGaussian, EnvKind::HeavyTailStudentT,
                    EnvKind::HeavyTailPareto, EnvKind::LinearModel, EnvKind::RkhsFinite}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown environment kind '" + std::string(name) + "'");
}

double KernelSpec::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw InputError("kernel arguments differ in dimension");
  double sq = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - y[j];
    sq += d * d;
  }
  return signal_variance * std::exp(-sq / (2.0 * lengthscale * lengthscale));
}

double GapProfile::min_positive_gap() const {
  double best = 0.0;
  for (double g : gaps) {
    if (g > 0.0 && (best == 0.0 || g < best)) best = g;
  }
  return best;
}

std::vector<double> gram_matrix(const KernelSpec& kernel,
                                const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      g[i * n + j] = g[j * n + i] = kernel(points[i], points[j]);
    }
  }
  return g;
}

double gram_min_eigenvalue(const KernelSpec& kernel,
                           const std::vector<std::vector<double>>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  const std::vector<double> g = gram_matrix(kernel, points);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      gm(g.data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Environment::Environment(EnvKind kind, std::vector<ArmModel> arms)
    : kind_(kind), arms_(std::move(arms)) {
  require_arms(arms_.size());
  for (const ArmModel& a : arms_) {
    require_finite(a.mean, "arm mean");
    require_finite(a.scale, "arm scale");
    if (a.scale < 0.0) throw InputError("arm scale must be >= 0");
    if (a.tail_param && !(*a.tail_param > 2.0)) {
      throw InputError("tail parameter must exceed 2 (finite variance)");
    }
  }
}

Environment Environment::bernoulli(std::vector<double> means) {
  std::vector<ArmModel> arms;
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0)) throw InputError("Bernoulli mean must lie in [0,1]");
    arms.push_back({m, 0.0, std::nullopt});
  }
  return Environment(EnvKind::Bernoulli, std::move(arms));
}

Environment Environment::bounded_uniform(std::vector<double> means,
                                         std::vector<double> half_widths) {
  require_same_length(half_widths.size(), means.size(), "half_widths");
  std::vector<ArmModel> arms;
  for (std::size_t i = 0; i < means.size(); ++i) {
    const double m = means[i], w = half_widths[i];
    if (!(w >= 0.0 && m - w >= 0.0 && m + w <= 1.0)) {
      throw InputError("uniform support [mean - w, mean + w] must lie in [0,1]");
    }
    arms.push_back({m, w, std::nullopt});
  }
  return Environment(EnvKind::BoundedUniform, std::move(arms));
}

Environment Environment::gaussian(std::vector<double> means, double scale) {
  std::vector<ArmModel> arms;
  for (double m : means) arms.push_back({m, scale, std::nullopt});
  return Environment(EnvKind::Gaussian, std::move(arms));
}

Environment Environment::heteroskedastic(std::vector<double> means, std::vector<double> scales) {
  require_same_length(scales.size(), means.size(), "scales");
  std::vector<ArmModel> arms;
  for (std::size_t i = 0; i < means.size(); ++i) arms.push_back({means[i], scales[i], std::nullopt});
  return Environment(EnvKind::HeteroskedasticGaussian, std::move(arms));
}

Environment Environment::student_t(std::vector<double> means, std::vector<double> scales,
                                   double dof) {
  require_same_length(scales.size(), means.size(), "scales");
  std::vector<ArmModel> arms;
  for (std::size_t i = 0; i < means.size(); ++i) arms.push_back({means[i], scales[i], dof});
  return Environment(EnvKind::HeavyTailStudentT, std::move(arms));
}

Environment Environment::pareto(std::vector<double> means, std::vector<double> scales,
                                double shape) {
  require_same_length(scales.size(), means.size(), "scales");
  std::vector<ArmModel> arms;
  for (std::size_t i = 0; i < means.size(); ++i) arms.push_back({means[i], scales[i], shape});
  return Environment(EnvKind::HeavyTailPareto, std::move(arms));
}

Environment Environment::linear(std::vector<double> theta_star,
                                std::vector<std::vector<double>> features, double noise_scale) {
  if (theta_star.empty()) throw InputError("theta_star must be non-empty");
  std::vector<ArmModel> arms;
  for (const auto& x : features) {
    if (x.size() != theta_star.size()) throw InputError("feature dimension differs from theta_star");
    double mean = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      require_finite(x[j], "feature entry");
      mean += x[j] * theta_star[j];
    }
    arms.push_back({mean, noise_scale, std::nullopt});
  }
  Environment env(EnvKind::LinearModel, std::move(arms));
  env.linear_ = LinearParams{std::move(theta_star), std::move(features), noise_scale};
  return env;
}

Environment Environment::rkhs(std::vector<std::vector<double>> arm_points, KernelSpec kernel,
                              std::vector<double> f_values, double noise_scale) {
  require_same_length(f_values.size(), arm_points.size(), "f_values");
  if (!(kernel.lengthscale > 0.0) || !(kernel.signal_variance > 0.0)) {
    throw InputError("kernel lengthscale and signal_variance must be > 0");
  }
  for (const auto& p : arm_points) {
    if (p.size() != arm_points.front().size()) throw InputError("arm points differ in dimension");
  }
  std::vector<ArmModel> arms;
  for (double f : f_values) arms.push_back({f, noise_scale, std::nullopt});
  Environment env(EnvKind::RkhsFinite, std::move(arms));
  if (gram_min_eigenvalue(kernel, arm_points) < -1e-10) {
    throw InputError("kernel matrix over arm points is not positive semi-definite");
  }
  env.rkhs_ = RkhsParams{std::move(arm_points), kernel, std::move(f_values), noise_scale};
  return env;
}

void Environment::check_arm(std::size_t arm) const {
  if (arm >= arms_.size()) {
    throw InputError("arm index " + std::to_string(arm) + " out of range [0, " +
                     std::to_string(arms_.size()) + ")");
  }
}

double Environment::true_mean(std::size_t arm) const {
  check_arm(arm);
  return arms_[arm].mean;
}

double Environment::sample_reward(std::size_t arm, CounterRng& rng) const {
  check_arm(arm);
  const ArmModel& a = arms_[arm];
  switch (kind_) {
    case EnvKind::Bernoulli:
      return rng.uniform() < a.mean ? 1.0 : 0.0;
    case EnvKind::BoundedUniform: {
      const double x = a.mean + a.scale * (2.0 * rng.uniform() - 1.0);
      if (!(x >= 0.0 && x <= 1.0)) throw InternalError("bounded reward left [0,1]");
      return x;
    }
    case EnvKind::Gaussian:
    case EnvKind::HeteroskedasticGaussian:
    case EnvKind::LinearModel:
    case EnvKind::RkhsFinite: {
      if (a.scale == 0.0) return a.mean;
      std::normal_distribution<double> z(0.0, 1.0);
      return a.mean + a.scale * z(rng);
    }
    case EnvKind::HeavyTailStudentT: {
      if (a.scale == 0.0) return a.mean;
      std::student_t_distribution<double> t(*a.tail_param);
      return a.mean + a.scale * t(rng);
    }
    case EnvKind::HeavyTailPareto: {
      if (a.scale == 0.0) return a.mean;
      const double shape = *a.tail_param;
      const double p = std::pow(1.0 - rng.uniform(), -1.0 / shape);
      return a.mean + a.scale * (p - shape / (shape - 1.0));
    }
  }
  throw InternalError("unhandled environment kind");
}

GapProfile Environment::gap_profile() const {
  GapProfile g;
  g.i_star = 0;
  for (std::size_t i = 1; i < arms_.size(); ++i) {
    if (arms_[i].mean > arms_[g.i_star].mean) g.i_star = i;
  }
  g.mu_star = arms_[g.i_star].mean;
  g.gaps.reserve(arms_.size());
  for (const ArmModel& a : arms_) g.gaps.push_back(g.mu_star - a.mean);
  return g;
}

std::uint64_t Environment::snapshot_id() const {
  Fnv h;
  h.add(static_cast<std::uint64_t>(kind_));
  for (const ArmModel& a : arms_) {
    h.add(a.mean);
    h.add(a.scale);
    h.add(a.tail_param.value_or(0.0));
  }
  if (linear_) {
    for (double v : linear_->theta_star) h.add(v);
    for (const auto& x : linear_->features)
      for (double v : x) h.add(v);
  }
  if (rkhs_) {
    for (const auto& p : rkhs_->arm_points)
      for (double v : p) h.add(v);
    h.add(rkhs_->kernel.lengthscale);
    h.add(rkhs_->kernel.signal_variance);
  }
  return h.h;
}

}  // namespace optimist
