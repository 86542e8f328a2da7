#pragma once

// Experiment configuration.
//
// The native format is a small TOML subset (bare keys, [table] headers,
// strings, integers, floats, booleans, nested arrays, comments). JSON with
// the same shape is accepted as an alternate input. Unknown keys, duplicate
// keys and duplicate tables are rejected; every error names the field path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "optimist/env.hpp"
#include "optimist/policy.hpp"

namespace optimist {

inline constexpr int kConfigSchema = 1;

// A real that may be given symbolically, e.g. delta = "1/(KT)" or
// rho = "min_gap/8". Kept unresolved so the config round-trips.
using SymbolicReal = std::variant<double, std::string>;

struct EnvConfig {
  EnvKind kind = EnvKind::Bernoulli;
  std::vector<double> means;
  std::vector<double> scales;  // noise scale / half-width per arm; one entry broadcasts
  double dof = 2.5;            // student_t
  double shape = 3.0;          // pareto
  // linear
  std::vector<double> theta;
  std::vector<std::vector<double>> features;  // empty: num_arms random unit vectors
  std::uint64_t num_arms = 0;
  std::uint64_t feature_seed = 0;
  double noise = 0.0;  // linear / rkhs noise scale
  // rkhs
  std::vector<std::vector<double>> points;
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  std::vector<double> f_values;

  bool operator==(const EnvConfig&) const = default;
};

struct PerturbConfig {
  SymbolicReal rho = 0.0;
  PerturbDistribution distribution = PerturbDistribution::UniformSymmetric;
  double scale = 1.0;

  bool operator==(const PerturbConfig&) const = default;
};

struct PolicySpec {
  EstimatorKind estimator = EstimatorKind::EmpiricalMean;
  RadiusKind radius = RadiusKind::Canonical;
  std::vector<double> sigma_sq{0.25};  // one entry broadcasts to every arm
  double c1 = 0.0;
  SymbolicReal delta = 0.05;
  double c_heavy = 1.0;
  double d_heavy = 1.0;
  std::uint64_t mom_blocks = 0;
  double truncation_scale = 1.0;
  double ridge_lambda = 1.0;
  double theta_bound = 1.0;
  std::optional<double> alpha;  // LinUCB; computed from the horizon when absent
  BetaSchedule beta_schedule = BetaSchedule::Time;
  std::optional<double> beta;   // required for beta_schedule = "fixed"
  std::optional<double> gp_noise_variance;  // default noise^2
  std::optional<PerturbConfig> perturbation;

  bool operator==(const PolicySpec&) const = default;
};

struct ChecksConfig {
  double good_event_max_failure_fraction = 0.01;
  bool traces = true;

  bool operator==(const ChecksConfig&) const = default;
};

struct CoverageConfig {
  std::uint64_t arm = 0;
  std::uint64_t m_max = 1000;
  std::uint64_t reps = 10000;

  bool operator==(const CoverageConfig&) const = default;
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  EnvConfig env;
  PolicySpec policy;
  std::uint64_t horizon = 1000;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  std::string output = "out";
  std::vector<std::uint64_t> sweep;  // empty, or >= 2 strictly increasing horizons
  ChecksConfig checks;
  CoverageConfig coverage;

  bool operator==(const ExperimentConfig&) const = default;
};

enum class ConfigFormat { Toml, Json };

// Throws ConfigError (field path first) on any problem.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(std::string_view text, ConfigFormat format);
void validate(const ExperimentConfig& config);

std::string emit_toml(const ExperimentConfig& config);
// Canonical single-line JSON (sorted keys).
std::string to_json_string(const ExperimentConfig& config);
// FNV-1a over the canonical JSON of the fields that affect results
// (everything except the output directory and the trace switch).
std::uint64_t config_hash(const ExperimentConfig& config);
std::string hex64(std::uint64_t v);

Environment build_environment(const ExperimentConfig& config);
// Policy for horizon T (symbolic delta and rho are resolved against K and T).
PolicyConfig build_policy(const ExperimentConfig& config, const Environment& env,
                          std::uint64_t horizon);
double resolve_delta(const SymbolicReal& delta, std::size_t num_arms, std::uint64_t horizon);

}  // namespace optimist
