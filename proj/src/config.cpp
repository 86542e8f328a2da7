#include "optimist/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "optimist/errors.hpp"
#include "optimist/trace.hpp"

namespace optimist {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// TOML subset -> json tree

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    std::string table_path;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (!eof() && peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        std::vector<std::string> keys = dotted_key();
        skip_ws();
        expect(']');
        end_of_line();
        table = &root;
        table_path.clear();
        for (const std::string& k : keys) {
          table_path += (table_path.empty() ? "" : ".") + k;
          json& next = (*table)[k];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) throw ConfigError(table_path, "is not a table");
          table = &next;
        }
        if (!defined_.insert(table_path).second) throw ConfigError(table_path, "duplicate table");
        continue;
      }
      const std::string key = bare_key();
      const std::string path = table_path.empty() ? key : table_path + "." + key;
      skip_ws();
      expect('=');
      skip_ws();
      json value = parse_value(path);
      end_of_line();
      if (table->contains(key)) throw ConfigError(path, "duplicate key");
      (*table)[key] = std::move(value);
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_), what);
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (true) {
      skip_ws();
      skip_comment();
      if (eof()) return;
      if (peek() == '\r') ++pos_;
      if (!eof() && peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (!eof() && peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    ++pos_;
    ++line_;
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> keys{bare_key()};
    while (!eof() && peek() == '.') {
      ++pos_;
      keys.push_back(bare_key());
    }
    return keys;
  }

  // Whitespace, comments and newlines inside an array.
  void skip_array_space() { skip_blank_lines(); }

  json parse_value(const std::string& path) {
    if (eof()) fail("missing value");
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      while (true) {
        skip_array_space();
        if (eof()) fail("unterminated array");
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(parse_value(path + "[" + std::to_string(arr.size()) + "]"));
        skip_array_space();
        if (eof()) fail("unterminated array");
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
    }
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                      peek() == '+' || peek() == '-' || peek() == '_')) {
      ++pos_;
    }
    const std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    return parse_number(tok, path);
  }

  json parse_number(std::string tok, const std::string& path) {
    if (tok.empty()) fail("bad value");
    tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
    std::string_view v = tok;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    const bool is_float = v.find_first_of(".eE") != std::string_view::npos || v == "inf" ||
                          v == "-inf" || v == "nan";
    if (is_float) {
      double d = 0.0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
      if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(path, "bad number '" + tok + "'");
      return d;
    }
    std::int64_t i = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(path, "bad value '" + tok + "'");
    return i;
  }

  json parse_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated string");
      const char e = s_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::set<std::string> defined_;
};

json parse_json_strict(std::string_view text) {
  // nlohmann keeps the last of duplicate keys; track keys per open object.
  std::vector<std::set<std::string>> open;
  std::vector<std::string> path;
  std::string last_key;
  const json::parser_callback_t cb = [&](int, json::parse_event_t ev, json& parsed) {
    switch (ev) {
      case json::parse_event_t::object_start:
        open.emplace_back();
        path.push_back(last_key);
        break;
      case json::parse_event_t::object_end:
        open.pop_back();
        path.pop_back();
        break;
      case json::parse_event_t::key: {
        last_key = parsed.get<std::string>();
        if (!open.back().insert(last_key).second) {
          std::string where;
          for (std::size_t i = 1; i < path.size(); ++i) where += path[i] + ".";
          throw ConfigError(where + last_key, "duplicate key");
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text.begin(), text.end(), cb);
  } catch (const json::parse_error& e) {
    throw ConfigError("json", e.what());
  }
}

// ---------------------------------------------------------------------------
// json tree -> ExperimentConfig, with unknown-key rejection

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a table");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double real(const std::string& key, double fallback) {
    const json* v = get(key);
    return v ? as_real(*v, field(key)) : fallback;
  }

  std::optional<double> optional_real(const std::string& key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    return as_real(*v, field(key));
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    const json* v = get(key);
    return v ? as_count(*v, field(key)) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> text(const std::string& key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> reals(const std::string& key) {
    const json* v = get(key);
    if (!v) return {};
    return as_reals(*v, field(key));
  }

  std::vector<std::vector<double>> matrix(const std::string& key) {
    const json* v = get(key);
    if (!v) return {};
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of arrays");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_reals((*v)[i], field(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  SymbolicReal symbolic(const std::string& key, SymbolicReal fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (v->is_string()) return v->get<std::string>();
    return as_real(*v, field(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

  static double as_real(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    return v.get<double>();
  }

  static std::uint64_t as_count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) throw ConfigError(where, "must be >= 0");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError(where, "expected a non-negative integer");
  }

  static std::vector<double> as_reals(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(where, "expected a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_real(v[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename F>
auto named(const std::string& field, F&& from_string, const std::string& name) {
  try {
    return from_string(name);
  } catch (const InputError& e) {
    throw ConfigError(field, e.what());
  }
}

BetaSchedule beta_schedule_from_string(std::string_view s) {
  if (s == "time") return BetaSchedule::Time;
  if (s == "horizon") return BetaSchedule::Horizon;
  if (s == "fixed") return BetaSchedule::Fixed;
  throw InputError("unknown beta schedule '" + std::string(s) + "'");
}

std::string_view to_string(BetaSchedule s) {
  switch (s) {
    case BetaSchedule::Time: return "time";
    case BetaSchedule::Horizon: return "horizon";
    case BetaSchedule::Fixed: return "fixed";
  }
  return "time";
}

ExperimentConfig from_json(const json& root) {
  ExperimentConfig c;
  Section top(root, "");
  if (const json* v = top.get("schema")) {
    if (Section::as_count(*v, "schema") != kConfigSchema) {
      throw ConfigError("schema", "unsupported schema version (expected " + std::to_string(kConfigSchema) + ")");
    }
  }
  c.horizon = top.count("horizon", c.horizon);
  c.replications = top.count("replications", c.replications);
  c.seed = top.count("seed", c.seed);
  c.output = top.text("output").value_or(c.output);
  if (const json* v = top.get("sweep")) {
    if (!v->is_array()) throw ConfigError("sweep", "expected an array of horizons");
    for (std::size_t i = 0; i < v->size(); ++i) {
      c.sweep.push_back(Section::as_count((*v)[i], "sweep[" + std::to_string(i) + "]"));
    }
  }

  const json* env_j = top.get("env");
  if (!env_j) throw ConfigError("env", "missing table");
  {
    Section s(*env_j, "env");
    EnvConfig& e = c.env;
    const auto kind = s.text("kind");
    if (!kind) throw ConfigError("env.kind", "missing");
    e.kind = named("env.kind", env_kind_from_string, *kind);
    e.means = s.reals("means");
    e.scales = s.reals("scales");
    e.dof = s.real("dof", e.dof);
    e.shape = s.real("shape", e.shape);
    e.theta = s.reals("theta");
    e.features = s.matrix("features");
    e.num_arms = s.count("num_arms", e.num_arms);
    e.feature_seed = s.count("feature_seed", e.feature_seed);
    e.noise = s.real("noise", e.noise);
    e.points = s.matrix("points");
    e.lengthscale = s.real("lengthscale", e.lengthscale);
    e.signal_variance = s.real("signal_variance", e.signal_variance);
    e.f_values = s.reals("f_values");
    s.finish();
  }

  const json* pol_j = top.get("policy");
  if (!pol_j) throw ConfigError("policy", "missing table");
  {
    Section s(*pol_j, "policy");
    PolicySpec& p = c.policy;
    if (auto v = s.text("estimator")) p.estimator = named("policy.estimator", estimator_kind_from_string, *v);
    if (auto v = s.text("radius")) p.radius = named("policy.radius", radius_kind_from_string, *v);
    if (s.get("sigma_sq")) p.sigma_sq = s.reals("sigma_sq");
    p.c1 = s.real("c1", p.c1);
    p.delta = s.symbolic("delta", p.delta);
    p.c_heavy = s.real("c_heavy", p.c_heavy);
    p.d_heavy = s.real("d_heavy", p.d_heavy);
    p.mom_blocks = s.count("mom_blocks", p.mom_blocks);
    p.truncation_scale = s.real("truncation_scale", p.truncation_scale);
    p.ridge_lambda = s.real("ridge_lambda", p.ridge_lambda);
    p.theta_bound = s.real("theta_bound", p.theta_bound);
    p.alpha = s.optional_real("alpha");
    if (auto v = s.text("beta_schedule")) p.beta_schedule = named("policy.beta_schedule", beta_schedule_from_string, *v);
    p.beta = s.optional_real("beta");
    p.gp_noise_variance = s.optional_real("gp_noise_variance");
    if (const json* pj = s.get("perturbation")) {
      Section ps(*pj, "policy.perturbation");
      PerturbConfig pc;
      pc.rho = ps.symbolic("rho", pc.rho);
      if (auto v = ps.text("distribution")) {
        pc.distribution = named("policy.perturbation.distribution", perturb_distribution_from_string, *v);
      }
      pc.scale = ps.real("scale", pc.scale);
      ps.finish();
      p.perturbation = pc;
    }
    s.finish();
  }

  if (const json* v = top.get("checks")) {
    Section s(*v, "checks");
    c.checks.good_event_max_failure_fraction =
        s.real("good_event_max_failure_fraction", c.checks.good_event_max_failure_fraction);
    c.checks.traces = s.boolean("traces", c.checks.traces);
    s.finish();
  }
  if (const json* v = top.get("coverage")) {
    Section s(*v, "coverage");
    c.coverage.arm = s.count("arm", c.coverage.arm);
    c.coverage.m_max = s.count("m_max", c.coverage.m_max);
    c.coverage.reps = s.count("reps", c.coverage.reps);
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// ExperimentConfig -> json tree

json symbolic_json(const SymbolicReal& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

json to_json(const ExperimentConfig& c, bool semantic_only) {
  json root;
  root["schema"] = c.schema;
  root["horizon"] = c.horizon;
  root["replications"] = c.replications;
  root["seed"] = c.seed;
  if (!semantic_only) root["output"] = c.output;
  if (!c.sweep.empty()) root["sweep"] = c.sweep;

  json env;
  const EnvConfig& e = c.env;
  env["kind"] = std::string(to_string(e.kind));
  if (!e.means.empty()) env["means"] = e.means;
  if (!e.scales.empty()) env["scales"] = e.scales;
  const EnvConfig d;
  const bool linear = e.kind == EnvKind::LinearModel;
  const bool rkhs = e.kind == EnvKind::RkhsFinite;
  if (e.kind == EnvKind::HeavyTailStudentT || e.dof != d.dof) env["dof"] = e.dof;
  if (e.kind == EnvKind::HeavyTailPareto || e.shape != d.shape) env["shape"] = e.shape;
  if (!e.theta.empty()) env["theta"] = e.theta;
  if (!e.features.empty()) env["features"] = e.features;
  if ((linear && e.features.empty()) || e.num_arms != d.num_arms) env["num_arms"] = e.num_arms;
  if ((linear && e.features.empty()) || e.feature_seed != d.feature_seed) env["feature_seed"] = e.feature_seed;
  if (linear || rkhs || e.noise != d.noise) env["noise"] = e.noise;
  if (!e.points.empty()) env["points"] = e.points;
  if (rkhs || e.lengthscale != d.lengthscale) env["lengthscale"] = e.lengthscale;
  if (rkhs || e.signal_variance != d.signal_variance) env["signal_variance"] = e.signal_variance;
  if (!e.f_values.empty()) env["f_values"] = e.f_values;
  root["env"] = env;

  json pol;
  const PolicySpec& p = c.policy;
  pol["estimator"] = std::string(to_string(p.estimator));
  pol["radius"] = std::string(to_string(p.radius));
  pol["sigma_sq"] = p.sigma_sq;
  pol["c1"] = p.c1;
  pol["delta"] = symbolic_json(p.delta);
  pol["c_heavy"] = p.c_heavy;
  pol["d_heavy"] = p.d_heavy;
  pol["mom_blocks"] = p.mom_blocks;
  pol["truncation_scale"] = p.truncation_scale;
  pol["ridge_lambda"] = p.ridge_lambda;
  pol["theta_bound"] = p.theta_bound;
  if (p.alpha) pol["alpha"] = *p.alpha;
  pol["beta_schedule"] = std::string(to_string(p.beta_schedule));
  if (p.beta) pol["beta"] = *p.beta;
  if (p.gp_noise_variance) pol["gp_noise_variance"] = *p.gp_noise_variance;
  if (p.perturbation) {
    json pj;
    pj["rho"] = symbolic_json(p.perturbation->rho);
    pj["distribution"] = std::string(to_string(p.perturbation->distribution));
    pj["scale"] = p.perturbation->scale;
    pol["perturbation"] = pj;
  }
  root["policy"] = pol;

  json checks;
  checks["good_event_max_failure_fraction"] = c.checks.good_event_max_failure_fraction;
  if (!semantic_only) checks["traces"] = c.checks.traces;
  root["checks"] = checks;

  json cov;
  cov["arm"] = c.coverage.arm;
  cov["m_max"] = c.coverage.m_max;
  cov["reps"] = c.coverage.reps;
  root["coverage"] = cov;
  return root;
}

std::string toml_scalar(const json& v) {
  if (v.is_string()) return json(v).dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    std::string s = format_double(v.get<double>());
    // Keep floats visibly floats so the value type survives a reread.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + toml_scalar(v[i]);
    return out + "]";
  }
  throw InternalError("cannot emit value as TOML");
}

void emit_table(std::ostringstream& out, const json& table, const std::string& name) {
  if (!name.empty()) out << "\n[" << name << "]\n";
  for (const auto& [key, value] : table.items()) {
    if (!value.is_object()) out << key << " = " << toml_scalar(value) << '\n';
  }
  for (const auto& [key, value] : table.items()) {
    if (value.is_object()) emit_table(out, value, name.empty() ? key : name + "." + key);
  }
}

std::size_t arm_count(const EnvConfig& e) {
  switch (e.kind) {
    case EnvKind::LinearModel: return e.features.empty() ? e.num_arms : e.features.size();
    case EnvKind::RkhsFinite: return e.points.size();
    default: return e.means.size();
  }
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t k, const std::string& field) {
  if (v.size() == k) return v;
  if (v.size() == 1) return std::vector<double>(k, v.front());
  throw ConfigError(field, "needs 1 or " + std::to_string(k) + " entries, got " + std::to_string(v.size()));
}

std::vector<std::vector<double>> random_features(std::size_t k, std::size_t d, std::uint64_t seed) {
  std::vector<std::vector<double>> out(k, std::vector<double>(d));
  for (std::size_t a = 0; a < k; ++a) {
    CounterRng rng(seed, 0, kFeatureStream, a);
    std::normal_distribution<double> z(0.0, 1.0);
    double norm = 0.0;
    for (double& x : out[a]) {
      x = z(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : out[a]) x /= norm;
  }
  return out;
}

double resolve_rho(const SymbolicReal& rho, const Environment& env) {
  if (const double* d = std::get_if<double>(&rho)) return *d;
  const std::string& s = std::get<std::string>(rho);
  const std::string prefix = "min_gap/";
  if (s.rfind(prefix, 0) == 0) {
    double div = 0.0;
    const char* b = s.data() + prefix.size();
    const auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), div);
    if (ec == std::errc() && ptr == s.data() + s.size() && div > 0.0) {
      return env.gap_profile().min_positive_gap() / div;
    }
  }
  throw ConfigError("policy.perturbation.rho", "expected a number or \"min_gap/<n>\", got '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

double resolve_delta(const SymbolicReal& delta, std::size_t num_arms, std::uint64_t horizon) {
  if (const double* d = std::get_if<double>(&delta)) return *d;
  std::string s = std::get<std::string>(delta);
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  const double k = static_cast<double>(num_arms);
  const double t = static_cast<double>(horizon);
  if (s == "1/(KT)" || s == "1/(K*T)") return 1.0 / (k * t);
  if (s == "1/T") return 1.0 / t;
  throw ConfigError("policy.delta", "expected a number, \"1/(KT)\" or \"1/T\", got '" + s + "'");
}

ExperimentConfig parse_config_text(std::string_view text, ConfigFormat format) {
  if (format == ConfigFormat::Json) return from_json(parse_json_strict(text));
  return from_json(TomlReader(text).parse());
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  ConfigFormat format = ConfigFormat::Toml;
  if (path.extension() == ".json") {
    format = ConfigFormat::Json;
  } else {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') format = ConfigFormat::Json;
  }
  return parse_config_text(text, format);
}

void validate(const ExperimentConfig& c) {
  const std::size_t k = arm_count(c.env);
  if (k < 1) throw ConfigError("env", "needs at least one arm");
  if (c.horizon < k) {
    throw ConfigError("horizon", "must be >= number of arms (" + std::to_string(k) + "), got " +
                                     std::to_string(c.horizon));
  }
  if (c.replications < 1) throw ConfigError("replications", "must be >= 1");
  if (!c.sweep.empty()) {
    if (c.sweep.size() < 2) throw ConfigError("sweep", "needs at least two horizons");
    for (std::size_t i = 0; i < c.sweep.size(); ++i) {
      const std::string f = "sweep[" + std::to_string(i) + "]";
      if (c.sweep[i] < k) throw ConfigError(f, "must be >= number of arms");
      if (i > 0 && c.sweep[i] <= c.sweep[i - 1]) throw ConfigError(f, "horizons must be strictly increasing");
    }
  }
  for (std::uint64_t t : c.sweep.empty() ? std::vector<std::uint64_t>{c.horizon} : c.sweep) {
    const double d = resolve_delta(c.policy.delta, k, t);
    if (!(d > 0.0 && d < 1.0)) throw ConfigError("policy.delta", "must lie in (0,1)");
  }
  broadcast(c.policy.sigma_sq, k, "policy.sigma_sq");
  if (c.policy.beta_schedule == BetaSchedule::Fixed && !c.policy.beta) {
    throw ConfigError("policy.beta", "required when beta_schedule = \"fixed\"");
  }
  const double f = c.checks.good_event_max_failure_fraction;
  if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("checks.good_event_max_failure_fraction", "must lie in [0,1]");
  if (c.coverage.arm >= k) throw ConfigError("coverage.arm", "out of range");
  if (c.coverage.m_max < 1) throw ConfigError("coverage.m_max", "must be >= 1");
  if (c.coverage.reps < 1) throw ConfigError("coverage.reps", "must be >= 1");

  const Environment env = build_environment(c);
  for (std::uint64_t t : c.sweep.empty() ? std::vector<std::uint64_t>{c.horizon} : c.sweep) {
    build_policy(c, env, t);
  }
}

Environment build_environment(const ExperimentConfig& c) {
  const EnvConfig& e = c.env;
  const std::size_t k = arm_count(e);
  try {
    switch (e.kind) {
      case EnvKind::Bernoulli:
        return Environment::bernoulli(e.means);
      case EnvKind::BoundedUniform:
        return Environment::bounded_uniform(e.means, broadcast(e.scales, k, "env.scales"));
      case EnvKind::Gaussian:
        if (e.scales.size() != 1) throw ConfigError("env.scales", "gaussian takes one shared scale");
        return Environment::gaussian(e.means, e.scales.front());
      case EnvKind::HeteroskedasticGaussian:
        return Environment::heteroskedastic(e.means, broadcast(e.scales, k, "env.scales"));
      case EnvKind::HeavyTailStudentT:
        return Environment::student_t(e.means, broadcast(e.scales, k, "env.scales"), e.dof);
      case EnvKind::HeavyTailPareto:
        return Environment::pareto(e.means, broadcast(e.scales, k, "env.scales"), e.shape);
      case EnvKind::LinearModel: {
        if (e.theta.empty()) throw ConfigError("env.theta", "missing");
        auto features = e.features.empty() ? random_features(k, e.theta.size(), e.feature_seed) : e.features;
        return Environment::linear(e.theta, std::move(features), e.noise);
      }
      case EnvKind::RkhsFinite: {
        KernelSpec kernel;
        kernel.lengthscale = e.lengthscale;
        kernel.signal_variance = e.signal_variance;
        return Environment::rkhs(e.points, kernel, e.f_values, e.noise);
      }
    }
  } catch (const InputError& err) {
    throw ConfigError("env", err.what());
  }
  throw ConfigError("env.kind", "unsupported");
}

PolicyConfig build_policy(const ExperimentConfig& c, const Environment& env, std::uint64_t horizon) {
  const PolicySpec& p = c.policy;
  const std::size_t k = env.num_arms();
  const double delta = resolve_delta(p.delta, k, horizon);
  PolicyConfig pc;
  pc.estimator.kind = p.estimator;
  pc.estimator.mom_blocks = p.mom_blocks;
  pc.estimator.truncation_scale = p.truncation_scale;
  pc.estimator.log_inv_delta = std::log(1.0 / delta);
  pc.estimator.ridge_lambda = p.ridge_lambda;
  pc.estimator.gp_noise_variance = p.gp_noise_variance.value_or(c.env.noise * c.env.noise);

  RadiusSpec base;
  base.kind = p.radius;
  base.c1 = p.c1;
  base.delta = delta;
  base.horizon = horizon;
  base.c_heavy = p.c_heavy;
  base.d_heavy = p.d_heavy;
  base.beta_schedule = p.beta_schedule;
  base.beta_t = p.beta.value_or(0.0);
  base.num_arms = k;
  if (p.radius == RadiusKind::LinUcb) {
    if (p.alpha) {
      base.alpha_t = *p.alpha;
    } else {
      const LinearParams* lp = env.linear_params();
      if (lp == nullptr) throw ConfigError("policy.radius", "linucb needs a linear environment");
      base.alpha_t = linucb_alpha(p.ridge_lambda, p.theta_bound, lp->noise_scale, delta,
                                  lp->theta_star.size(), horizon);
    }
  }
  const std::vector<double> sig = broadcast(p.sigma_sq, k, "policy.sigma_sq");
  for (std::size_t i = 0; i < k; ++i) {
    RadiusSpec r = base;
    r.sigma_sq = sig[i];
    pc.radius.push_back(r);
  }
  if (p.perturbation) {
    PerturbSpec ps;
    ps.rho_t = resolve_rho(p.perturbation->rho, env);
    ps.distribution = p.perturbation->distribution;
    ps.scale = p.perturbation->scale;
    pc.perturbation = ps;
  }
  try {
    pc.validate(env);
  } catch (const InputError& err) {
    throw ConfigError("policy", err.what());
  }
  return pc;
}

std::string emit_toml(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "# optimist experiment, schema " << kConfigSchema << '\n';
  emit_table(out, to_json(config, false), "");
  return out.str();
}

std::string to_json_string(const ExperimentConfig& config) { return to_json(config, false).dump(); }

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string s = to_json(config, true).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace optimist
