#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "optimist/policy.hpp"

namespace optimist {

// Trace CSV, schema v1:
//
//   # optimist-trace v1
//   # <key>=<value>                      (zero or more metadata lines)
//   replication,t,arm,reward,est_0,rad_0,idx_0,xi_0,...,pull_count_before
//   <one row per step>
//
// Reals are written in shortest round-trip form ("nan", "inf" for the
// placeholders of unpulled arms), so reading a trace back is bit-exact.

inline constexpr const char* kTraceSchema = "# optimist-trace v1";

using TraceMeta = std::vector<std::pair<std::string, std::string>>;

void write_trace_csv(std::ostream& out, const BanditTrace& trace, const TraceMeta& meta);

struct LoadedTrace {
  BanditTrace trace;
  TraceMeta meta;
  const std::string* find(const std::string& key) const;
};

// Throws InputError on a malformed file.
LoadedTrace read_trace_csv(std::istream& in);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace optimist
