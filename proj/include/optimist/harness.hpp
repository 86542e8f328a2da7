#pragma once

// Replication runner and file emission.
//
// Output directory layout (run):
//   manifest.json           config hash, seed, version, per-replication paths
//   timings.json            wall-clock seconds (kept out of the manifest so
//                           the manifest itself is reproducible)
//   traces/rep_NNNNNN.csv   unless traces are disabled
//   reports/rep_NNNNNN.json
//   aggregate.json, summary.csv, summary.txt
// A sweep writes one such tree per horizon under h<T>/ plus sweep.csv and a
// combined summary at the top.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "optimist/config.hpp"
#include "optimist/verify.hpp"

namespace optimist {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  std::optional<std::filesystem::path> out;
  bool no_traces = false;
  unsigned workers = 1;
};

struct HorizonResult {
  std::uint64_t horizon = 0;
  std::vector<ReplicationReport> reports;  // ordered by replication
  AggregateReport aggregate;
  std::vector<std::optional<CollapseThreshold>> thresholds;
  std::vector<double> gaps;
  std::vector<double> seconds;  // per replication
};

// Runs `replications` episodes of horizon T on a pool of `workers` threads.
// Results depend only on (config, T, seed), never on scheduling. When
// `dir` is given, traces (if `write_traces`) and reports are written there.
HorizonResult run_horizon(const ExperimentConfig& config, std::uint64_t horizon,
                          std::uint64_t replications, std::uint64_t seed, unsigned workers,
                          const std::filesystem::path* dir, bool write_traces);

struct ReplicationFiles {
  std::uint64_t replication = 0;
  std::string trace;  // empty with traces disabled
  std::string report;
};

struct HorizonEntry {
  std::uint64_t horizon = 0;
  std::string directory;  // relative to the output root
  std::vector<ReplicationFiles> files;
  bool deterministic_pass = true;
  bool all_flags_pass = true;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::uint64_t replications = 0;
  std::string version = kVersion;
  std::vector<HorizonEntry> horizons;
  bool deterministic_pass = true;
  bool all_flags_pass = true;
  std::filesystem::path root;
};

struct SweepRow {
  std::uint64_t horizon = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  double regret_over_log_t = 0.0;
  std::vector<double> gaps;
  std::vector<double> mean_pulls;
  std::vector<std::optional<std::uint64_t>> pull_bound;
};

SweepRow summarize(const HorizonResult& result);
// max / min of regret / ln T across rows; 1 when every row has zero regret.
double log_scaling_ratio(const std::vector<SweepRow>& rows);

// Single horizon (the config's `horizon`).
RunManifest run(const ExperimentConfig& config, const RunOptions& options);
// Every horizon of config.sweep; throws ConfigError when fewer than two.
RunManifest sweep(const ExperimentConfig& config, const RunOptions& options);

// Plot-ready CSV (one row per horizon and arm) and a text table that puts
// the bound m0 + 1 next to each empirical E[N_i(T)]. 6 significant digits.
void emit_summary(const std::vector<SweepRow>& rows, std::ostream& csv, std::ostream& text);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& csv);

std::string report_json(const ReplicationReport& report, std::uint64_t seed, std::uint64_t horizon);
std::string aggregate_json(const AggregateReport& agg, const SweepRow& row);
std::string manifest_json(const RunManifest& manifest);

std::string format_sig6(double v);

}  // namespace optimist
