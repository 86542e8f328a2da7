#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "optimist/errors.hpp"
#include "optimist/harness.hpp"
#include "optimist/trace.hpp"

using namespace optimist;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("optimist_unit_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.env.kind = EnvKind::Bernoulli;
  c.env.means = {0.9, 0.7};
  c.policy.radius = RadiusKind::Canonical;
  c.policy.delta = std::string("1/(KT)");
  c.horizon = 400;
  c.replications = 4;
  c.seed = 12;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("T = K gives one row per arm") {
  ExperimentConfig c = small_config();
  c.horizon = 2;
  c.replications = 1;
  RunOptions o;
  o.out = scratch("tk");
  const RunManifest m = run(c, o);
  REQUIRE(m.horizons.size() == 1);
  REQUIRE(m.horizons[0].files.size() == 1);
  std::ifstream in(*o.out / m.horizons[0].files[0].trace);
  const LoadedTrace t = read_trace_csv(in);
  CHECK(t.trace.steps() == 2);
  CHECK(t.trace.arm == std::vector<std::uint32_t>{0, 1});
  CHECK(m.deterministic_pass);
}

TEST_CASE("trace files round-trip bit-exactly") {
  const ExperimentConfig c = small_config();
  const Environment env = build_environment(c);
  const PolicyConfig p = build_policy(c, env, c.horizon);
  const BanditTrace tr = run_episode(p, env, c.horizon, 3, 1);
  std::stringstream s;
  write_trace_csv(s, tr, {{"seed", "3"}});
  const LoadedTrace back = read_trace_csv(s);
  CHECK(back.trace.same_steps(tr));
  CHECK(back.trace.seed == 3);
  std::stringstream bad("not a trace\n");
  CHECK_THROWS_AS(read_trace_csv(bad), InputError);
}

TEST_CASE("output is identical across runs and worker counts") {
  const ExperimentConfig c = small_config();
  RunOptions a, b;
  a.out = scratch("det_a");
  b.out = scratch("det_b");
  a.workers = 1;
  b.workers = 3;
  run(c, a);
  run(c, b);
  for (const char* f : {"manifest.json", "aggregate.json", "summary.csv", "summary.txt",
                        "traces/rep_000003.csv", "reports/rep_000002.json"}) {
    CAPTURE(f);
    CHECK(slurp(*a.out / f) == slurp(*b.out / f));
  }
}

TEST_CASE("no-traces keeps reports only") {
  RunOptions o;
  o.out = scratch("notraces");
  o.no_traces = true;
  const RunManifest m = run(small_config(), o);
  CHECK_FALSE(fs::exists(*o.out / "traces"));
  CHECK(fs::exists(*o.out / "reports" / "rep_000000.json"));
  CHECK(m.horizons[0].files[0].trace.empty());
}

TEST_CASE("sweep with a zero-gap environment") {
  ExperimentConfig c = small_config();
  c.env.means = {0.5, 0.5};
  c.sweep = {1000, 10000};
  c.replications = 2;
  RunOptions o;
  o.out = scratch("zerogap");
  o.no_traces = true;
  const RunManifest m = sweep(c, o);
  CHECK(m.horizons.size() == 2);
  const auto agg = nlohmann::json::parse(slurp(*o.out / "h10000" / "aggregate.json"));
  CHECK(agg["mean_regret"].get<double>() == 0.0);
  CHECK(slurp(*o.out / "sweep.csv").find("1000,0,0,0") != std::string::npos);
  c.sweep = {1000};
  CHECK_THROWS_AS(sweep(c, o), ConfigError);
}

TEST_CASE("summary formatting") {
  std::ostringstream csv, text;
  emit_summary({}, csv, text);
  CHECK(csv.str() == "horizon,arm,gap,mean_pulls,pull_bound,mean_regret,std_regret,regret_over_log_t\n");
  CHECK(text.str().empty());

  SweepRow r;
  r.horizon = 20000;
  r.mean_regret = 123.456789;
  r.gaps = {0.0, 0.2};
  r.mean_pulls = {19000.123456, 999.87654321};
  r.pull_bound = {std::nullopt, 8479};
  emit_summary({r}, csv, text);
  CHECK(text.str().find("arm 1: E[N]=999.877, bound=8479") != std::string::npos);
  CHECK(format_sig6(1234567.0) == "1.23457e+06");
}

TEST_CASE("zero-noise run: arm 1 is pulled once") {
  ExperimentConfig c = small_config();
  c.env.kind = EnvKind::Gaussian;
  c.env.scales = {0.0};
  c.policy.sigma_sq = {0.0};
  c.replications = 2;
  const HorizonResult res = run_horizon(c, 500, 2, 1, 1, nullptr, false);
  CHECK(res.aggregate.mean_pulls[1] == 1.0);
}

}
