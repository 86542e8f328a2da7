#include "optimist/radius.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "optimist/errors.hpp"
#include "optimist/simd/kernels.hpp"

namespace optimist {

namespace {

void require_pulls(std::uint64_t m) {
  if (m < 1) throw InputError("radius needs m >= 1");
}

double log_horizon(std::uint64_t horizon) { return std::log(static_cast<double>(horizon)); }

std::uint64_t ceil_count(double x) {
  if (!(x < 9.0e18)) throw InputError("collapse threshold overflows a 64-bit count");
  const double c = std::ceil(x);
  return c < 1.0 ? 1 : static_cast<std::uint64_t>(c);
}

// ceil() of an exact-boundary value can land one short after rounding;
// step forward until the defining property holds.
template <typename Radius>
std::uint64_t settle(std::uint64_t m0, double gap, Radius&& radius) {
  for (int bump = 0; bump < 4; ++bump) {
    if (radius(m0) <= gap / 4.0) return m0;
    ++m0;
  }
  throw InternalError("collapse threshold does not satisfy r(m0) <= gap/4");
}

}  // namespace

std::string_view to_string(RadiusKind kind) {
  switch (kind) {
    case RadiusKind::Canonical: return "canonical";
    case RadiusKind::UcbHoeffding: return "ucb";
    case RadiusKind::UcbV: return "ucbv";
    case RadiusKind::EmpiricalBernstein: return "empirical_bernstein";
    case RadiusKind::HeavyTail: return "heavy_tail";
    case RadiusKind::LinUcb: return "linucb";
    case RadiusKind::GpUcb: return "gpucb";
  }
  return "unknown";
}

RadiusKind radius_kind_from_string(std::string_view name) {
  for (RadiusKind k : {RadiusKind::Canonical, RadiusKind::UcbHoeffding, RadiusKind::UcbV,
                       RadiusKind::EmpiricalBernstein, RadiusKind::HeavyTail, RadiusKind::LinUcb,
                       RadiusKind::GpUcb}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown radius kind '" + std::string(name) + "'");
}

double RadiusSpec::log_inv_delta() const { return -std::log(delta); }

void RadiusSpec::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0,1)");
  for (double v : {sigma_sq, c1, c_heavy, d_heavy, alpha_t, beta_t}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("radius scale parameters must be >= 0");
  }
  if (horizon < 1) throw InputError("horizon must be >= 1");
}

double SqrtLinear::operator()(std::uint64_t m) const {
  require_pulls(m);
  const double md = static_cast<double>(m);
  return std::sqrt(a / md) + b / md;
}

bool envelope_is_exact(RadiusKind kind) {
  return kind == RadiusKind::Canonical || kind == RadiusKind::UcbHoeffding ||
         kind == RadiusKind::HeavyTail;
}

std::optional<SqrtLinear> envelope(const RadiusSpec& spec) {
  const double l = spec.log_inv_delta();
  switch (spec.kind) {
    case RadiusKind::Canonical:
      return SqrtLinear{2.0 * spec.sigma_sq * l, spec.c1 * l};
    case RadiusKind::UcbHoeffding:
      return SqrtLinear{2.0 * log_horizon(spec.horizon), 0.0};
    case RadiusKind::UcbV: {
      const double lt = log_horizon(spec.horizon);
      return SqrtLinear{2.0 * spec.sigma_sq * lt, 3.0 * lt};
    }
    case RadiusKind::EmpiricalBernstein:
      return SqrtLinear{2.0 * spec.sigma_sq * l, spec.c1 * l};
    case RadiusKind::HeavyTail:
      return SqrtLinear{spec.c_heavy * spec.c_heavy * l, spec.d_heavy * l};
    case RadiusKind::LinUcb:
    case RadiusKind::GpUcb:
      return std::nullopt;
  }
  return std::nullopt;
}

double canonical_radius(const RadiusSpec& spec, std::uint64_t m) {
  require_pulls(m);
  spec.validate();
  const double l = spec.log_inv_delta();
  return SqrtLinear{2.0 * spec.sigma_sq * l, spec.c1 * l}(m);
}

double ucb_radius(std::uint64_t horizon, std::uint64_t m) {
  require_pulls(m);
  return SqrtLinear{2.0 * log_horizon(horizon), 0.0}(m);
}

double ucbv_radius(double var_est, std::uint64_t horizon, std::uint64_t m) {
  require_pulls(m);
  if (var_est < 0.0) throw InputError("variance estimate must be >= 0");
  const double lt = log_horizon(horizon);
  return SqrtLinear{2.0 * var_est * lt, 3.0 * lt}(m);
}

double empirical_bernstein_radius(double var_est, const RadiusSpec& spec, std::uint64_t m) {
  require_pulls(m);
  if (var_est < 0.0) throw InputError("variance estimate must be >= 0");
  const double l = spec.log_inv_delta();
  return SqrtLinear{2.0 * var_est * l, spec.c1 * l}(m);
}

double heavy_tail_radius(const RadiusSpec& spec, std::uint64_t m) {
  require_pulls(m);
  const double l = spec.log_inv_delta();
  return SqrtLinear{spec.c_heavy * spec.c_heavy * l, spec.d_heavy * l}(m);
}

double linucb_radius(double alpha_t, double width) {
  if (width < 0.0) throw InputError("LinUCB width must be >= 0");
  return alpha_t * width;
}

double gpucb_radius(double beta_t, double posterior_std) {
  if (beta_t < 0.0 || posterior_std < 0.0) throw InputError("GP-UCB inputs must be >= 0");
  return std::sqrt(beta_t) * posterior_std;
}

double linucb_alpha(double lambda, double theta_bound, double noise_scale, double delta,
                    std::size_t dim, std::uint64_t horizon) {
  const double d = static_cast<double>(dim);
  const double t = static_cast<double>(horizon);
  return std::sqrt(lambda) * theta_bound +
         noise_scale * std::sqrt(2.0 * std::log(1.0 / delta) + d * std::log(1.0 + t / (lambda * d)));
}

double gpucb_beta(std::size_t num_arms, std::uint64_t t, double delta) {
  const double td = static_cast<double>(t);
  return 2.0 * std::log(static_cast<double>(num_arms) * td * td * std::numbers::pi *
                        std::numbers::pi / (6.0 * delta));
}

double gpucb_beta_at(const RadiusSpec& spec, std::uint64_t t) {
  switch (spec.beta_schedule) {
    case BetaSchedule::Time: return gpucb_beta(spec.num_arms, t, spec.delta);
    case BetaSchedule::Horizon: return gpucb_beta(spec.num_arms, spec.horizon, spec.delta);
    case BetaSchedule::Fixed: return spec.beta_t;
  }
  return spec.beta_t;
}

double per_arm_radius(const RadiusSpec& spec, std::uint64_t m, double var_est) {
  switch (spec.kind) {
    case RadiusKind::Canonical: return canonical_radius(spec, m);
    case RadiusKind::UcbHoeffding: return ucb_radius(spec.horizon, m);
    case RadiusKind::UcbV: return ucbv_radius(var_est, spec.horizon, m);
    case RadiusKind::EmpiricalBernstein: return empirical_bernstein_radius(var_est, spec, m);
    case RadiusKind::HeavyTail: return heavy_tail_radius(spec, m);
    case RadiusKind::LinUcb:
    case RadiusKind::GpUcb:
      break;
  }
  throw InputError("per_arm_radius called for a time-indexed radius kind");
}

void radius_table(const RadiusSpec& spec, std::uint64_t m_first, std::span<double> out) {
  require_pulls(m_first);
  if (!envelope_is_exact(spec.kind)) throw InputError("radius_table needs a closed-form radius");
  const SqrtLinear e = *envelope(spec);
  simd::radius_table(e.a, e.b, m_first, out);
}

CollapseThreshold collapse_threshold(const RadiusSpec& spec, double gap, std::size_t arm) {
  if (!(gap > 0.0)) throw InputError("collapse threshold needs gap > 0");
  if (spec.kind != RadiusKind::Canonical) throw InputError("collapse_threshold needs a canonical spec");
  spec.validate();
  const double l = spec.log_inv_delta();
  const double variance_term = 128.0 * spec.sigma_sq * l / (gap * gap);
  const double linear_term = 8.0 * spec.c1 * l / gap;
  std::uint64_t m0 = ceil_count(std::max(variance_term, linear_term));
  m0 = settle(m0, gap, [&](std::uint64_t m) { return canonical_radius(spec, m); });
  return {arm, m0, gap};
}

std::optional<CollapseThreshold> envelope_threshold(const RadiusSpec& spec, double gap,
                                                    std::size_t arm) {
  if (!(gap > 0.0)) throw InputError("collapse threshold needs gap > 0");
  if (spec.kind == RadiusKind::Canonical) return collapse_threshold(spec, gap, arm);
  const std::optional<SqrtLinear> e = envelope(spec);
  if (!e) return std::nullopt;
  std::uint64_t m0 = ceil_count(std::max(64.0 * e->a / (gap * gap), 8.0 * e->b / gap));
  m0 = settle(m0, gap, *e);
  return CollapseThreshold{arm, m0, gap};
}

}  // namespace optimist
