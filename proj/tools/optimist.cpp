// optimist: run, sweep and verify optimistic bandit experiments.
//
// Exit status: 0 when every deterministic check passed, 1 when one failed,
// 2 on bad input.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "optimist/config.hpp"
#include "optimist/errors.hpp"
#include "optimist/harness.hpp"
#include "optimist/trace.hpp"
#include "optimist/verify.hpp"

namespace fs = std::filesystem;
using namespace optimist;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> reps;
  bool no_traces = false;
  unsigned workers = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (TOML or JSON)")->required();
  cmd->add_option("--out", c.out, "output directory (default: config output)");
  cmd->add_option("--seed", c.seed, "master seed, overrides the config");
  cmd->add_option("--reps", c.reps, "replications, overrides the config");
  cmd->add_flag("--no-traces", c.no_traces, "write reports only");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1u, 1024u));
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = parse_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.reps) cfg.replications = *c.reps;
  if (!c.out.empty()) cfg.output = c.out;
  validate(cfg);
  return cfg;
}

RunOptions options(const Common& c) {
  RunOptions o;
  o.no_traces = c.no_traces;
  o.workers = c.workers;
  return o;
}

int report_manifest(const RunManifest& m) {
  std::ifstream in(m.root / "summary.txt");
  std::cout << in.rdbuf();
  std::cout << "config " << m.config_hash << ", seed " << m.seed << ", " << m.replications
            << " replications -> " << (m.root / "manifest.json").string() << '\n';
  std::cout << "deterministic checks: " << (m.deterministic_pass ? "pass" : "FAIL")
            << "; statistical flags: " << (m.all_flags_pass ? "pass" : "FAIL") << '\n';
  return m.deterministic_pass ? 0 : 1;
}

int cmd_verify(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trace", "cannot open '" + path + "'");
  const LoadedTrace loaded = read_trace_csv(in);
  const std::string* cfg_text = loaded.find("config");
  const std::string* horizon = loaded.find("horizon");
  if (cfg_text == nullptr || horizon == nullptr) {
    throw ConfigError("trace", "metadata lacks the config or horizon needed to recompute");
  }
  const ExperimentConfig cfg = parse_config_text(*cfg_text, ConfigFormat::Json);
  const std::uint64_t t = std::stoull(*horizon);
  const Environment env = build_environment(cfg);
  const PolicyConfig policy = build_policy(cfg, env, t);
  const BanditTrace& trace = loaded.trace;
  if (trace.env_id != env.snapshot_id()) throw ConfigError("trace", "env_id does not match the embedded config");
  if (trace.steps() != t) throw ConfigError("trace", "row count does not match the horizon");

  const ReplicationReport rep = verify_trace(trace, env, policy);
  const BanditTrace replay = run_episode(policy, env, t, trace.seed, trace.replication);
  const bool replay_ok = replay.same_steps(trace);
  std::cout << report_json(rep, trace.seed, t);
  std::cout << "consistency: " << (rep.consistency.consistent ? "pass" : "FAIL " + rep.consistency.first_mismatch) << '\n'
            << "replay: " << (replay_ok ? "identical" : "DIFFERS") << '\n'
            << "good event: " << (rep.good_event.holds ? "holds" : "fails") << '\n'
            << "lemma check: " << (rep.lemma_two.all_pass ? "pass" : "FAIL") << '\n'
            << "pull bound: " << (rep.theorem.pass ? "pass" : "FAIL") << '\n'
            << "regret: " << format_sig6(rep.regret.regret) << '\n';
  return rep.deterministic_pass() && replay_ok ? 0 : 1;
}

int cmd_coverage(const Common& c) {
  // --reps counts Monte-Carlo paths here, not replications
  Common paths = c;
  paths.reps.reset();
  ExperimentConfig cfg = load(paths);
  if (c.reps) {
    cfg.coverage.reps = *c.reps;
    validate(cfg);
  }
  const Environment env = build_environment(cfg);
  const PolicyConfig policy = build_policy(cfg, env, cfg.horizon);
  const std::size_t arm = cfg.coverage.arm;
  const RadiusSpec& spec = policy.radius.at(arm);
  const CoverageResult r = coverage_estimate(policy.estimator, spec, env, arm, cfg.coverage.m_max,
                                             cfg.coverage.reps, cfg.seed);
  nlohmann::json j = {{"config_hash", hex64(config_hash(cfg))},
                      {"seed", cfg.seed},
                      {"arm", arm},
                      {"delta", spec.delta},
                      {"m_max", r.m_max},
                      {"reps", r.reps},
                      {"violating_paths", r.violating_paths},
                      {"frequency", r.frequency},
                      {"max_pointwise_frequency", r.max_pointwise_frequency},
                      {"within_delta", r.frequency <= spec.delta}};
  fs::create_directories(cfg.output);
  std::ofstream(fs::path(cfg.output) / "coverage.json") << j.dump(2) << '\n';
  std::cout << "uniform deviation frequency " << format_sig6(r.frequency) << " over " << r.reps
            << " paths (delta " << format_sig6(spec.delta) << ", "
            << (r.frequency <= spec.delta ? "within" : "exceeds") << "); max pointwise "
            << format_sig6(r.max_pointwise_frequency) << '\n';
  // Monte-Carlo coverage is statistical, so it never sets the exit status.
  return 0;
}

int cmd_show(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("manifest", "cannot open '" + path + "'");
  const nlohmann::json m = nlohmann::json::parse(in);
  std::cout << "version " << m.at("version").get<std::string>() << ", config "
            << m.at("config_hash").get<std::string>() << ", seed " << m.at("seed") << ", "
            << m.at("replications") << " replications\n";
  const fs::path root = fs::path(path).parent_path();
  std::ifstream summary(root / m.at("summary_txt").get<std::string>());
  if (summary) std::cout << summary.rdbuf();
  for (const auto& h : m.at("horizons")) {
    std::cout << "horizon " << h.at("horizon") << ": deterministic "
              << (h.at("deterministic_pass").get<bool>() ? "pass" : "FAIL") << ", flags "
              << (h.at("all_flags_pass").get<bool>() ? "pass" : "FAIL") << '\n';
  }
  return m.at("deterministic_pass").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimist: optimistic index policies for stochastic bandits"};
  app.require_subcommand(1);
  Common run_opts, sweep_opts, cov_opts;
  std::string trace_path, manifest_path;

  auto* run_cmd = app.add_subcommand("run", "run replications at the configured horizon");
  add_common(run_cmd, run_opts);
  auto* sweep_cmd = app.add_subcommand("sweep", "run every horizon in the config's sweep list");
  add_common(sweep_cmd, sweep_opts);
  auto* verify_cmd = app.add_subcommand("verify", "recompute and check a trace file");
  verify_cmd->add_option("trace", trace_path, "trace CSV")->required();
  auto* cov_cmd = app.add_subcommand("coverage", "Monte-Carlo check of a radius on one arm");
  add_common(cov_cmd, cov_opts);
  auto* show_cmd = app.add_subcommand("show", "print a run manifest");
  show_cmd->add_option("manifest", manifest_path, "manifest.json")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return report_manifest(run(load(run_opts), options(run_opts)));
    if (*sweep_cmd) return report_manifest(sweep(load(sweep_opts), options(sweep_opts)));
    if (*verify_cmd) return cmd_verify(trace_path);
    if (*cov_cmd) return cmd_coverage(cov_opts);
    if (*show_cmd) return cmd_show(manifest_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
