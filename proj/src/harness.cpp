#include "optimist/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "optimist/errors.hpp"
#include "optimist/trace.hpp"

namespace optimist {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string rep_name(std::uint64_t rep, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%06llu%s", static_cast<unsigned long long>(rep), ext);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

json optional_json(const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); }

// Reals in reports go through the shortest round-trip form; non-finite
// values become strings since JSON has no literal for them.
json real_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

TraceMeta trace_meta(const ExperimentConfig& config, std::uint64_t horizon, std::uint64_t seed,
                     std::uint64_t rep, const Environment& env) {
  return {
      {"seed", std::to_string(seed)},
      {"replication", std::to_string(rep)},
      {"horizon", std::to_string(horizon)},
      {"env_id", std::to_string(env.snapshot_id())},
      {"config_hash", hex64(config_hash(config))},
      {"config", to_json_string(config)},
  };
}

}  // namespace

std::string format_sig6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------

HorizonResult run_horizon(const ExperimentConfig& config, std::uint64_t horizon,
                          std::uint64_t replications, std::uint64_t seed, unsigned workers,
                          const fs::path* dir, bool write_traces) {
  const Environment env = build_environment(config);
  const PolicyConfig policy = build_policy(config, env, horizon);
  if (horizon < env.num_arms()) throw ConfigError("horizon", "must be >= number of arms");

  HorizonResult res;
  res.horizon = horizon;
  res.thresholds = collapse_thresholds(policy, env);
  res.gaps = env.gap_profile().gaps;
  res.reports.resize(replications);
  res.seconds.resize(replications);

  if (dir != nullptr) {
    fs::create_directories(*dir / "reports");
    if (write_traces) fs::create_directories(*dir / "traces");
  }

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto worker = [&] {
    while (true) {
      const std::uint64_t r = next.fetch_add(1);
      if (r >= replications) return;
      try {
        const auto start = std::chrono::steady_clock::now();
        const BanditTrace trace = run_episode(policy, env, horizon, seed, r);
        ReplicationReport report = verify_trace(trace, env, policy);
        if (dir != nullptr) {
          if (write_traces) {
            std::ostringstream os;
            write_trace_csv(os, trace, trace_meta(config, horizon, seed, r, env));
            write_file(*dir / "traces" / rep_name(r, ".csv"), os.str());
          }
          write_file(*dir / "reports" / rep_name(r, ".json"), report_json(report, seed, horizon));
        }
        res.reports[r] = std::move(report);
        res.seconds[r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(replications);
        return;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(replications)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  res.aggregate = aggregate(res.reports, res.thresholds, config.checks.good_event_max_failure_fraction);
  return res;
}

SweepRow summarize(const HorizonResult& result) {
  SweepRow row;
  row.horizon = result.horizon;
  row.mean_regret = result.aggregate.mean_regret;
  row.std_regret = result.aggregate.std_regret;
  row.regret_over_log_t = row.mean_regret / std::log(static_cast<double>(result.horizon));
  row.gaps = result.gaps;
  row.mean_pulls = result.aggregate.mean_pulls;
  row.pull_bound = result.aggregate.pull_bound;
  return row;
}

double log_scaling_ratio(const std::vector<SweepRow>& rows) {
  if (rows.empty()) return 1.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const SweepRow& r : rows) {
    lo = std::min(lo, r.regret_over_log_t);
    hi = std::max(hi, r.regret_over_log_t);
  }
  if (hi == 0.0) return 1.0;
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// ---------------------------------------------------------------------------

std::string report_json(const ReplicationReport& r, std::uint64_t seed, std::uint64_t horizon) {
  json j;
  j["replication"] = r.replication;
  j["seed"] = seed;
  j["horizon"] = horizon;
  j["deterministic_pass"] = r.deterministic_pass();
  j["consistency"] = {{"consistent", r.consistency.consistent},
                      {"mismatches", r.consistency.mismatches},
                      {"first_mismatch", r.consistency.first_mismatch}};

  json viol = json::array();
  for (std::size_t i = 0; i < r.good_event.violations.size() && i < 20; ++i) {
    const Violation& v = r.good_event.violations[i];
    viol.push_back({{"arm", v.arm}, {"at", v.m}, {"deviation", real_json(v.deviation)}, {"radius", real_json(v.radius)}});
  }
  j["good_event"] = {{"holds", r.good_event.holds},
                     {"indexed_by", r.good_event.time_indexed ? "time" : "pull_count"},
                     {"violation_count", r.good_event.violations.size()},
                     {"violations", viol}};

  json arms = json::array();
  for (const ArmLemmaReport& a : r.lemma_two.arms) {
    json fails = json::array();
    for (std::size_t i = 0; i < a.failures.size() && i < 20; ++i) {
      const LemmaCheck& c = a.failures[i];
      fails.push_back({{"visit", c.visit}, {"time", c.time}, {"radius", real_json(c.radius)},
                       {"precondition", c.precondition}});
    }
    arms.push_back({{"arm", a.arm},
                    {"gap", real_json(a.gap)},
                    {"threshold", real_json(a.threshold)},
                    {"m0", optional_json(a.m0)},
                    {"exempt", a.exempt},
                    {"checked", a.checked},
                    {"skipped", a.skipped},
                    {"failure_count", a.failures.size()},
                    {"failures", fails},
                    {"first_visit_radius_le_gap_over_4", optional_json(a.first_visit_quarter_gap)},
                    {"first_visit_radius_le_gap_over_8", optional_json(a.first_visit_eighth_gap)},
                    {"pass", a.pass}});
  }
  j["lemma_two"] = {{"perturbed", r.lemma_two.perturbed},
                    {"checks", r.lemma_two.checks},
                    {"all_pass", r.lemma_two.all_pass},
                    {"arms", arms}};

  json th = json::array();
  for (const ArmTheorem& a : r.theorem.arms) {
    th.push_back({{"arm", a.arm}, {"pulls", a.pulls}, {"m0", optional_json(a.m0)},
                  {"within_m0", a.within_m0}, {"collapsed_pulls", a.collapsed_pulls},
                  {"exempt", a.exempt}});
  }
  j["theorem"] = {{"good_event", r.theorem.good_event}, {"pass", r.theorem.pass}, {"arms", th}};

  json contrib = json::array();
  for (double c : r.regret.contribution) contrib.push_back(real_json(c));
  j["regret"] = {{"horizon", r.regret.horizon},
                 {"pulls", r.regret.pulls},
                 {"contribution", contrib},
                 {"regret", real_json(r.regret.regret)}};
  return j.dump(2) + "\n";
}

std::string aggregate_json(const AggregateReport& a, const SweepRow& row) {
  json pulls = json::array(), bounds = json::array();
  for (double p : a.mean_pulls) pulls.push_back(real_json(p));
  for (const auto& b : a.pull_bound) bounds.push_back(optional_json(b));
  json j = {
      {"horizon", row.horizon},
      {"replications", a.replications},
      {"mean_regret", real_json(a.mean_regret)},
      {"std_regret", real_json(a.std_regret)},
      {"regret_over_log_t", real_json(row.regret_over_log_t)},
      {"mean_pulls", pulls},
      {"pull_bound", bounds},
      {"pulls_within_bound", a.pulls_within_bound},
      {"good_event_failures", a.good_event_failures},
      {"good_event_failure_frequency", real_json(a.good_event_failure_frequency)},
      {"max_good_event_failure_frequency", real_json(a.max_good_event_failure_frequency)},
      {"good_event_ok", a.good_event_ok},
      {"lemma_two_all_pass", a.lemma_two_all_pass},
      {"theorem_all_pass", a.theorem_all_pass},
      {"consistent", a.consistent},
      {"deterministic_pass", a.deterministic_pass()},
      {"all_flags_pass", a.all_flags_pass()},
  };
  return j.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  json hs = json::array();
  for (const HorizonEntry& h : m.horizons) {
    json files = json::array();
    for (const ReplicationFiles& f : h.files) {
      files.push_back({{"replication", f.replication},
                       {"trace", f.trace.empty() ? json(nullptr) : json(f.trace)},
                       {"report", f.report}});
    }
    hs.push_back({{"horizon", h.horizon},
                  {"directory", h.directory},
                  {"aggregate", (fs::path(h.directory) / "aggregate.json").generic_string()},
                  {"deterministic_pass", h.deterministic_pass},
                  {"all_flags_pass", h.all_flags_pass},
                  {"replications", files}});
  }
  json j = {{"version", m.version},
            {"config_hash", m.config_hash},
            {"seed", m.seed},
            {"replications", m.replications},
            {"config", "config.toml"},
            {"timings", "timings.json"},
            {"summary_csv", "summary.csv"},
            {"summary_txt", "summary.txt"},
            {"deterministic_pass", m.deterministic_pass},
            {"all_flags_pass", m.all_flags_pass},
            {"horizons", hs}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& csv) {
  const std::size_t k = rows.empty() ? 0 : rows.front().mean_pulls.size();
  csv << "horizon,mean_regret,std_regret,regret_over_log_t";
  for (std::size_t i = 0; i < k; ++i) csv << ",mean_pulls_" << i;
  csv << '\n';
  for (const SweepRow& r : rows) {
    csv << r.horizon << ',' << format_sig6(r.mean_regret) << ',' << format_sig6(r.std_regret) << ','
        << format_sig6(r.regret_over_log_t);
    for (double p : r.mean_pulls) csv << ',' << format_sig6(p);
    csv << '\n';
  }
}

void emit_summary(const std::vector<SweepRow>& rows, std::ostream& csv, std::ostream& text) {
  csv << "horizon,arm,gap,mean_pulls,pull_bound,mean_regret,std_regret,regret_over_log_t\n";
  for (const SweepRow& r : rows) {
    for (std::size_t i = 0; i < r.mean_pulls.size(); ++i) {
      csv << r.horizon << ',' << i << ',' << format_sig6(r.gaps[i]) << ',' << format_sig6(r.mean_pulls[i])
          << ',' << (r.pull_bound[i] ? std::to_string(*r.pull_bound[i]) : "") << ','
          << format_sig6(r.mean_regret) << ',' << format_sig6(r.std_regret) << ','
          << format_sig6(r.regret_over_log_t) << '\n';
    }
  }
  for (const SweepRow& r : rows) {
    text << "horizon " << r.horizon << ": regret " << format_sig6(r.mean_regret) << " (std "
         << format_sig6(r.std_regret) << "), regret/ln T " << format_sig6(r.regret_over_log_t) << '\n';
    for (std::size_t i = 0; i < r.mean_pulls.size(); ++i) {
      text << "  arm " << i << ": E[N]=" << format_sig6(r.mean_pulls[i]) << ", bound="
           << (r.pull_bound[i] ? std::to_string(*r.pull_bound[i]) : std::string("none"));
      if (!(r.gaps[i] > 0.0)) text << " (optimal)";
      text << '\n';
    }
  }
  if (rows.size() >= 2) text << "max/min regret/ln T ratio: " << format_sig6(log_scaling_ratio(rows)) << '\n';
}

namespace {

RunManifest run_all(const ExperimentConfig& config, const RunOptions& options,
                    const std::vector<std::uint64_t>& horizons, bool nested) {
  RunManifest m;
  m.config_hash = hex64(config_hash(config));
  m.seed = options.seed.value_or(config.seed);
  m.replications = options.replications.value_or(config.replications);
  if (m.replications < 1) throw ConfigError("replications", "must be >= 1");
  m.root = options.out.value_or(fs::path(config.output));
  const bool traces = config.checks.traces && !options.no_traces;
  fs::create_directories(m.root);
  write_file(m.root / "config.toml", emit_toml(config));

  std::vector<SweepRow> rows;
  json timings = json::array();
  for (std::uint64_t t : horizons) {
    HorizonEntry entry;
    entry.horizon = t;
    entry.directory = nested ? "h" + std::to_string(t) : ".";
    const fs::path dir = m.root / entry.directory;
    const HorizonResult res = run_horizon(config, t, m.replications, m.seed, options.workers, &dir, traces);
    for (std::uint64_t r = 0; r < m.replications; ++r) {
      const fs::path base(entry.directory);
      ReplicationFiles f;
      f.replication = r;
      if (traces) f.trace = (base / "traces" / rep_name(r, ".csv")).generic_string();
      f.report = (base / "reports" / rep_name(r, ".json")).generic_string();
      entry.files.push_back(f);
    }
    entry.deterministic_pass = res.aggregate.deterministic_pass();
    entry.all_flags_pass = res.aggregate.all_flags_pass();
    m.deterministic_pass = m.deterministic_pass && entry.deterministic_pass;
    m.all_flags_pass = m.all_flags_pass && entry.all_flags_pass;
    const SweepRow row = summarize(res);
    write_file(dir / "aggregate.json", aggregate_json(res.aggregate, row));
    rows.push_back(row);
    double total = 0.0;
    for (double s : res.seconds) total += s;
    timings.push_back({{"horizon", t}, {"replication_seconds", res.seconds}, {"total_seconds", total}});
    m.horizons.push_back(std::move(entry));
  }

  std::ostringstream csv, text;
  emit_summary(rows, csv, text);
  write_file(m.root / "summary.csv", csv.str());
  write_file(m.root / "summary.txt", text.str());
  if (nested) {
    std::ostringstream sw;
    write_sweep_csv(rows, sw);
    write_file(m.root / "sweep.csv", sw.str());
  }
  write_file(m.root / "timings.json", timings.dump(2) + "\n");
  write_file(m.root / "manifest.json", manifest_json(m));
  return m;
}

}  // namespace

RunManifest run(const ExperimentConfig& config, const RunOptions& options) {
  return run_all(config, options, {config.horizon}, false);
}

RunManifest sweep(const ExperimentConfig& config, const RunOptions& options) {
  if (config.sweep.size() < 2) throw ConfigError("sweep", "needs at least two horizons");
  return run_all(config, options, config.sweep, true);
}

}  // namespace optimist
