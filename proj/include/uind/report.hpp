#ifndef UIND_REPORT_HPP
#define UIND_REPORT_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "uind/bits.hpp"

namespace uind {

constexpr const char* kToolVersion = "0.1.0";

// One report record: ordered key=value pairs on a single line.
using Record = std::vector<std::pair<std::string, std::string>>;

inline std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string fmt_number(std::uint64_t v) { return std::to_string(v); }

// Digest over the fully resolved configuration; sorted so flag order cannot
// leak into the bytes.
inline std::uint64_t config_digest(Record config) {
  std::sort(config.begin(), config.end());
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [k, v] : config) {
    h = fnv1a64(k, h);
    h = fnv1a64("=", h);
    h = fnv1a64(v, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

// Header (version + config digest), an optional timestamp line, then one
// line per record. Everything below the header is the report body; with
// deterministic=true the bytes depend only on config and inputs.
inline void emit_report(std::ostream& os, const Record& config, const std::vector<Record>& records,
                        bool deterministic) {
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(config_digest(config)));
  os << "uind=" << kToolVersion << " config=" << digest << "\n";
  if (!deterministic) os << "time=" << std::time(nullptr) << "\n";
  for (const Record& rec : records) {
    bool first = true;
    for (const auto& [k, v] : rec) {
      os << (first ? "" : " ") << k << "=" << v;
      first = false;
    }
    os << "\n";
  }
}

}  // namespace uind

#endif
