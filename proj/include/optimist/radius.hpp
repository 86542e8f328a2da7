#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace optimist {

enum class RadiusKind {
  Canonical,           // sqrt(2 sigma^2 L / m) + c1 L / m,   L = log(1/delta)
  UcbHoeffding,        // sqrt(2 log T / m)
  UcbV,                // sqrt(2 s^2(m) log T / m) + 3 log T / m
  EmpiricalBernstein,  // sqrt(2 s^2(m) L / m) + c1 L / m  (heteroskedastic arms)
  HeavyTail,           // C sqrt(L / m) + D L / m
  LinUcb,              // alpha * sqrt(x^T V^{-1} x)
  GpUcb,               // sqrt(beta_t) * sigma_{t-1}(x)
};

std::string_view to_string(RadiusKind kind);
RadiusKind radius_kind_from_string(std::string_view name);

enum class BetaSchedule {
  Time,     // beta_t = 2 log(K t^2 pi^2 / (6 delta))
  Horizon,  // beta_T, constant over the run
  Fixed,    // spec.beta_t as given
};

// Parameters of one arm's confidence radius. Only the fields relevant to
// `kind` are consulted.
struct RadiusSpec {
  RadiusKind kind = RadiusKind::Canonical;
  double sigma_sq = 0.25;  // variance proxy; for UcbV / EmpiricalBernstein the worst-case bound
  double c1 = 0.0;
  double delta = 0.05;
  std::uint64_t horizon = 1;
  double c_heavy = 0.0;
  double d_heavy = 0.0;
  double alpha_t = 0.0;
  double beta_t = 0.0;
  BetaSchedule beta_schedule = BetaSchedule::Time;
  std::size_t num_arms = 2;

  double log_inv_delta() const;
  // Throws InputError when delta is outside (0,1) or a scale is negative.
  void validate() const;
  bool operator==(const RadiusSpec&) const = default;
};

// A radius of the form sqrt(a / m) + b / m. Canonical, UcbHoeffding and
// HeavyTail radii are exactly this shape; UcbV and EmpiricalBernstein are
// bounded by it when the empirical variance stays below sigma_sq.
struct SqrtLinear {
  double a = 0.0;
  double b = 0.0;
  double operator()(std::uint64_t m) const;
};

std::optional<SqrtLinear> envelope(const RadiusSpec& spec);
bool envelope_is_exact(RadiusKind kind);

double canonical_radius(const RadiusSpec& spec, std::uint64_t m);
double ucb_radius(std::uint64_t horizon, std::uint64_t m);
double ucbv_radius(double var_est, std::uint64_t horizon, std::uint64_t m);
double empirical_bernstein_radius(double var_est, const RadiusSpec& spec, std::uint64_t m);
double heavy_tail_radius(const RadiusSpec& spec, std::uint64_t m);
double linucb_radius(double alpha_t, double width);
double gpucb_radius(double beta_t, double posterior_std);

// sqrt(lambda) B + noise sqrt(2 log(1/delta) + d log(1 + T / (lambda d))).
double linucb_alpha(double lambda, double theta_bound, double noise_scale, double delta,
                    std::size_t dim, std::uint64_t horizon);
// 2 log(K t^2 pi^2 / (6 delta)).
double gpucb_beta(std::size_t num_arms, std::uint64_t t, double delta);
// beta in effect at (1-based) time t under the spec's schedule.
double gpucb_beta_at(const RadiusSpec& spec, std::uint64_t t);

// Radius of a per-arm kind (everything except LinUcb / GpUcb) after m pulls
// with empirical variance var_est.
double per_arm_radius(const RadiusSpec& spec, std::uint64_t m, double var_est);

// out[j] = radius at m = m_first + j for kinds with an exact envelope.
void radius_table(const RadiusSpec& spec, std::uint64_t m_first, std::span<double> out);

struct CollapseThreshold {
  std::size_t arm = 0;
  std::uint64_t m0 = 1;
  double gap = 0.0;
};

// m0 = ceil(max(128 sigma^2 L / gap^2, 8 c1 L / gap)), at least 1, for a
// Canonical spec. Guarantees canonical_radius(spec, m0) <= gap / 4.
CollapseThreshold collapse_threshold(const RadiusSpec& spec, double gap, std::size_t arm = 0);

// Same bound for any kind with an envelope: ceil(max(64 a / gap^2, 8 b / gap)).
std::optional<CollapseThreshold> envelope_threshold(const RadiusSpec& spec, double gap,
                                                    std::size_t arm = 0);

}  // namespace optimist
