#include "optimist/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "optimist/errors.hpp"

namespace optimist {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("trace line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("trace line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const BanditTrace& trace, const TraceMeta& meta) {
  const std::size_t k = trace.num_arms;
  out << kTraceSchema << '\n';
  for (const auto& [key, value] : meta) out << "# " << key << '=' << value << '\n';
  out << "replication,t,arm,reward";
  for (std::size_t i = 0; i < k; ++i) {
    out << ",est_" << i << ",rad_" << i << ",idx_" << i << ",xi_" << i;
  }
  out << ",pull_count_before\n";
  std::string row;
  for (std::size_t t = 0; t < trace.steps(); ++t) {
    row.clear();
    row += std::to_string(trace.replication);
    row += ',';
    row += std::to_string(t);
    row += ',';
    row += std::to_string(trace.arm[t]);
    row += ',';
    row += format_double(trace.reward[t]);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t c = t * k + i;
      for (double v : {trace.estimate[c], trace.radius[c], trace.index[c], trace.xi[c]}) {
        row += ',';
        row += format_double(v);
      }
    }
    row += ',';
    row += std::to_string(trace.pull_count_before[t]);
    row += '\n';
    out << row;
  }
}

const std::string* LoadedTrace::find(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

LoadedTrace read_trace_csv(std::istream& in) {
  LoadedTrace loaded;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kTraceSchema) {
    throw InputError("trace: missing schema line '" + std::string(kTraceSchema) + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("# ", 0) != 0) break;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw InputError("trace line " + std::to_string(line_no) + ": bad metadata");
    loaded.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
  }
  const auto header = split(line, ',');
  if (header.size() < 5 || (header.size() - 5) % 4 != 0 || header[0] != "replication" ||
      header.back() != "pull_count_before") {
    throw InputError("trace: malformed column header");
  }
  BanditTrace& tr = loaded.trace;
  tr.num_arms = (header.size() - 5) / 4;
  const std::size_t k = tr.num_arms;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw InputError("trace line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " columns");
    }
    tr.replication = parse_uint(cells[0], line_no);
    if (parse_uint(cells[1], line_no) != tr.steps()) {
      throw InputError("trace line " + std::to_string(line_no) + ": time column out of sequence");
    }
    const std::uint64_t arm = parse_uint(cells[2], line_no);
    if (arm >= k) throw InputError("trace line " + std::to_string(line_no) + ": arm out of range");
    tr.arm.push_back(static_cast<std::uint32_t>(arm));
    tr.reward.push_back(parse_double(cells[3], line_no));
    for (std::size_t i = 0; i < k; ++i) {
      tr.estimate.push_back(parse_double(cells[4 + 4 * i], line_no));
      tr.radius.push_back(parse_double(cells[5 + 4 * i], line_no));
      tr.index.push_back(parse_double(cells[6 + 4 * i], line_no));
      tr.xi.push_back(parse_double(cells[7 + 4 * i], line_no));
    }
    tr.pull_count_before.push_back(parse_uint(cells.back(), line_no));
  }
  tr.horizon = tr.steps();
  if (const std::string* s = loaded.find("seed")) tr.seed = std::stoull(*s);
  if (const std::string* s = loaded.find("env_id")) tr.env_id = std::stoull(*s);
  return loaded;
}

}  // namespace optimist
