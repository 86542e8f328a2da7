#include "optimist/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "optimist/errors.hpp"
#include "optimist/simd/kernels.hpp"

namespace optimist {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InputError(std::string(what) + " must be finite");
}

}  // namespace

MeanVarState update_mean_var(MeanVarState s, double x) {
  require_finite(x, "observation");
  s.count += 1;
  const double delta = x - s.mean;
  s.mean += delta / static_cast<double>(s.count);
  s.m2 += delta * (x - s.mean);
  if (s.m2 < 0.0) s.m2 = 0.0;
  return s;
}

void SampleBuffer::push(double x) {
  require_finite(x, "sample");
  samples_.push_back(x);
  prefix_.push_back(prefix_.back() + x);
}

double SampleBuffer::mean() const {
  if (samples_.empty()) throw InputError("mean of empty buffer");
  return prefix_.back() / static_cast<double>(samples_.size());
}

double median_of_means(const SampleBuffer& buffer, std::size_t num_blocks) {
  return median_of_means(buffer, num_blocks, buffer.size());
}

double median_of_means(const SampleBuffer& buffer, std::size_t num_blocks, std::size_t n) {
  if (n == 0 || n > buffer.size()) throw InputError("median_of_means needs a non-empty buffer");
  if (num_blocks < 1 || num_blocks > n) {
    throw InputError("median_of_means needs 1 <= num_blocks <= sample count");
  }
  const std::size_t base = n / num_blocks;
  const std::size_t extra = n % num_blocks;
  std::vector<double> means(num_blocks);
  std::size_t begin = 0;
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    means[b] = buffer.range_sum(begin, begin + len) / static_cast<double>(len);
    begin += len;
  }
  const std::size_t mid = num_blocks / 2;
  std::nth_element(means.begin(), means.begin() + static_cast<std::ptrdiff_t>(mid), means.end());
  const double upper = means[mid];
  if (num_blocks % 2 == 1) return upper;
  const double lower = *std::max_element(means.begin(), means.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double truncated_mean(const SampleBuffer& buffer, double threshold) {
  return truncated_mean(buffer, threshold, buffer.size());
}

double truncated_mean(const SampleBuffer& buffer, double threshold, std::size_t n) {
  if (!(threshold > 0.0)) throw InputError("truncation threshold must be > 0");
  if (n == 0 || n > buffer.size()) throw InputError("truncated_mean needs a non-empty buffer");
  double sum = 0.0;
  for (double s : buffer.samples().first(n)) sum += std::clamp(s, -threshold, threshold);
  return sum / static_cast<double>(n);
}

// ---------------------------------------------------------------------------

RidgeState::RidgeState(std::size_t dim, double lambda)
    : dim_(dim),
      lambda_(lambda),
      v_(dim * dim, 0.0),
      v_inv_(dim * dim, 0.0),
      xty_(dim, 0.0),
      theta_(dim, 0.0),
      scratch_(dim, 0.0) {
  if (dim == 0) throw InputError("ridge dimension must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("ridge lambda must be > 0");
  for (std::size_t i = 0; i < dim; ++i) {
    v_[i * dim + i] = lambda;
    v_inv_[i * dim + i] = 1.0 / lambda;
  }
}

void RidgeState::update(std::span<const double> x, double y) {
  if (x.size() != dim_) throw InputError("ridge feature dimension mismatch");
  for (double v : x) require_finite(v, "ridge feature");
  require_finite(y, "ridge response");

  const auto& k = simd::active();
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) v_[i * dim_ + j] += x[i] * x[j];
    xty_[i] += x[i] * y;
  }
  ++updates_;

  if (updates_ % kRefactorEvery == 0) {
    refactor();
  } else {
    // Sherman-Morrison: V^{-1} -= (V^{-1}x)(V^{-1}x)^T / (1 + x^T V^{-1} x).
    k.matvec(v_inv_.data(), dim_, x.data(), scratch_.data());
    const double denom = 1.0 + k.dot(x.data(), scratch_.data(), dim_);
    k.rank_one_update(v_inv_.data(), dim_, scratch_.data(), 1.0 / denom);
  }
  k.matvec(v_inv_.data(), dim_, xty_.data(), theta_.data());
}

void RidgeState::refactor() {
  const auto d = static_cast<Eigen::Index>(dim_);
  const Eigen::Map<const RowMatrix> v(v_.data(), d, d);
  Eigen::Map<RowMatrix> inv(v_inv_.data(), d, d);
  inv = v.llt().solve(RowMatrix::Identity(d, d));
  // Keep the stored inverse exactly symmetric.
  const RowMatrix sym = 0.5 * (inv + inv.transpose());
  inv = sym;
}

RidgePrediction RidgeState::predict(std::span<const double> x) const {
  if (x.size() != dim_) throw InputError("ridge feature dimension mismatch");
  const auto& k = simd::active();
  RidgePrediction p;
  p.mean = k.dot(x.data(), theta_.data(), dim_);
  std::vector<double> vx(dim_);
  k.matvec(v_inv_.data(), dim_, x.data(), vx.data());
  const double q = k.dot(x.data(), vx.data(), dim_);
  p.width = std::sqrt(std::max(q, 0.0));
  return p;
}

// ---------------------------------------------------------------------------

GpPosterior::GpPosterior(KernelSpec kernel, std::vector<std::vector<double>> arm_points,
                         double noise_variance)
    : kernel_(kernel),
      points_(std::move(arm_points)),
      noise_variance_(noise_variance),
      counts_(points_.size(), 0),
      sums_(points_.size(), 0.0),
      mean_(points_.size(), 0.0),
      std_(points_.size(), 0.0) {
  if (points_.empty()) throw InputError("GP needs at least one arm point");
  if (!(noise_variance > 0.0)) throw InputError("GP noise variance must be > 0");
  gram_ = gram_matrix(kernel_, points_);
  recompute();
}

void GpPosterior::update(std::size_t arm, double y) {
  if (arm >= points_.size()) throw InputError("GP arm index out of range");
  require_finite(y, "GP observation");
  observed_.emplace_back(arm, y);
  counts_[arm] += 1;
  sums_[arm] += y;
  recompute();
}

void GpPosterior::recompute() {
  const std::size_t k = points_.size();
  std::vector<std::size_t> active;
  for (std::size_t a = 0; a < k; ++a)
    if (counts_[a] > 0) active.push_back(a);

  const auto p = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd m(p, p);
  Eigen::VectorXd ybar(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    const std::size_t a = active[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < p; ++c) m(r, c) = gram_[a * k + active[static_cast<std::size_t>(c)]];
    const double n = static_cast<double>(counts_[a]);
    m(r, r) += noise_variance_ / n;
    ybar(r) = sums_[a] / n;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  const Eigen::VectorXd alpha = p > 0 ? Eigen::VectorXd(llt.solve(ybar)) : Eigen::VectorXd();

  Eigen::VectorXd kx(p);
  for (std::size_t x = 0; x < k; ++x) {
    for (Eigen::Index r = 0; r < p; ++r) kx(r) = gram_[x * k + active[static_cast<std::size_t>(r)]];
    double var = gram_[x * k + x];
    double mu = 0.0;
    if (p > 0) {
      mu = kx.dot(alpha);
      var -= kx.dot(llt.solve(kx));
    }
    mean_[x] = mu;
    std_[x] = std::sqrt(std::max(var, 1e-300));
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::EmpiricalMean: return "empirical_mean";
    case EstimatorKind::MedianOfMeans: return "median_of_means";
    case EstimatorKind::TruncatedMean: return "truncated_mean";
    case EstimatorKind::Ridge: return "ridge";
    case EstimatorKind::GpPosterior: return "gp";
  }
  return "unknown";
}

EstimatorKind estimator_kind_from_string(std::string_view name) {
  for (EstimatorKind k : {EstimatorKind::EmpiricalMean, EstimatorKind::MedianOfMeans,
                          EstimatorKind::TruncatedMean, EstimatorKind::Ridge,
                          EstimatorKind::GpPosterior}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown estimator kind '" + std::string(name) + "'");
}

bool is_per_arm(EstimatorKind kind) {
  return kind != EstimatorKind::Ridge && kind != EstimatorKind::GpPosterior;
}

std::size_t mom_block_count(const EstimatorConfig& config, std::size_t m) {
  std::size_t k = config.mom_blocks;
  if (k == 0) k = static_cast<std::size_t>(std::max(1.0, std::ceil(8.0 * config.log_inv_delta)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(m, 1));
}

double truncation_threshold(const EstimatorConfig& config, std::size_t m) {
  return std::sqrt(config.truncation_scale * static_cast<double>(m) / config.log_inv_delta);
}

double per_arm_value(const EstimatorConfig& config, const MeanVarState& stats,
                     const SampleBuffer& buffer, std::size_t m) {
  if (m == 0) throw NotInitializedError("arm has no observations yet");
  switch (config.kind) {
    case EstimatorKind::EmpiricalMean:
      return stats.mean;
    case EstimatorKind::MedianOfMeans:
      return median_of_means(buffer, mom_block_count(config, m), m);
    case EstimatorKind::TruncatedMean:
      return truncated_mean(buffer, truncation_threshold(config, m), m);
    default:
      throw InputError("per_arm_value called for a shared-state estimator");
  }
}

EstimatorBank::EstimatorBank(const EstimatorConfig& config, const Environment& env)
    : config_(config), stats_(env.num_arms()), buffers_(env.num_arms()) {
  if (config.kind == EstimatorKind::Ridge) {
    const LinearParams* lp = env.linear_params();
    if (lp == nullptr) throw InputError("ridge estimator needs a linear environment");
    features_ = lp->features;
    ridge_.emplace_back(lp->theta_star.size(), config.ridge_lambda);
  } else if (config.kind == EstimatorKind::GpPosterior) {
    const RkhsParams* rp = env.rkhs_params();
    if (rp == nullptr) throw InputError("GP estimator needs an RKHS environment");
    gp_.emplace_back(rp->kernel, rp->arm_points, config.gp_noise_variance);
  }
}

void EstimatorBank::observe(std::size_t arm, double reward) {
  if (arm >= stats_.size()) throw InputError("arm index out of range");
  stats_[arm] = update_mean_var(stats_[arm], reward);
  if (config_.kind == EstimatorKind::MedianOfMeans || config_.kind == EstimatorKind::TruncatedMean) {
    buffers_[arm].push(reward);
  }
  if (!ridge_.empty()) ridge_.front().update(features_[arm], reward);
  if (!gp_.empty()) gp_.front().update(arm, reward);
}

double EstimatorBank::value(std::size_t arm) const {
  if (arm >= stats_.size()) throw InputError("arm index out of range");
  switch (config_.kind) {
    case EstimatorKind::Ridge:
      return ridge_.front().predict(features_[arm]).mean;
    case EstimatorKind::GpPosterior:
      return gp_.front().mean(arm);
    default:
      return per_arm_value(config_, stats_[arm], buffers_[arm], stats_[arm].count);
  }
}

double EstimatorBank::width(std::size_t arm) const {
  if (!ridge_.empty()) return ridge_.front().predict(features_.at(arm)).width;
  if (!gp_.empty()) return gp_.front().stddev(arm);
  return 0.0;
}

}  // namespace optimist
