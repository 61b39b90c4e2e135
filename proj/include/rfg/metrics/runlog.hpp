#pragma once

#include <cstdint>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "rfg/numcore/tensor.hpp"

namespace rfg::metrics {

struct Record {
  std::uint64_t index = 0;
  std::string smiles;
  double reward = 0.0;
  double shaped_reward = 0.0;
  double prior_nll = 0.0;
  double agent_nll = 0.0;
  std::uint64_t batch = 0;

  bool operator==(const Record&) const = default;
};

struct RunLog {
  std::vector<Record> records;
  std::size_t budget = 10000;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

inline constexpr const char* kRunLogHeader =
    "index,smiles,reward,shaped_reward,prior_nll,agent_nll,batch";

/// Shortest text that round-trips the double exactly; integers below 1e17
/// are written without an exponent.
inline std::string format_double(double v) {
  char buf[32];
  int prec = 1;
  for (; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  if (std::isfinite(v) && v != 0.0) {
    const int exp10 = static_cast<int>(std::floor(std::log10(std::fabs(v))));
    if (exp10 >= prec && exp10 < 17) std::snprintf(buf, sizeof buf, "%.*g", exp10 + 1, v);
  }
  return buf;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv(const std::string& line, std::size_t row) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw Error("run log row " + std::to_string(row) + ": unterminated quote");
  return fields;
}

inline double parse_double(const std::string& s, std::size_t row, const char* col) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error("run log row " + std::to_string(row) + ": bad " + col + " '" + s + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(const std::string& s, std::size_t row, const char* col) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw Error("run log row " + std::to_string(row) + ": bad " + col + " '" + s + "'");
  }
  return std::stoull(s);
}

}  // namespace detail

inline void write_csv(const RunLog& log, std::ostream& os) {
  os << kRunLogHeader << '\n';
  for (const auto& r : log.records) {
    os << r.index << ',' << detail::csv_field(r.smiles) << ',' << format_double(r.reward) << ','
       << format_double(r.shaped_reward) << ',' << format_double(r.prior_nll) << ','
       << format_double(r.agent_nll) << ',' << r.batch << '\n';
  }
}

/// Parses a run log; row numbers in errors count the header as row 1.
inline RunLog read_csv(std::istream& is, std::size_t budget = 10000) {
  RunLog log;
  log.budget = budget;
  std::string line;
  if (!std::getline(is, line)) throw Error("run log: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunLogHeader) throw Error("run log row 1: unexpected header '" + line + "'");
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv(line, row);
    if (f.size() != 7) {
      throw Error("run log row " + std::to_string(row) + ": expected 7 columns, got " +
                  std::to_string(f.size()));
    }
    Record r;
    r.index = detail::parse_uint(f[0], row, "index");
    r.smiles = f[1];
    r.reward = detail::parse_double(f[2], row, "reward");
    r.shaped_reward = detail::parse_double(f[3], row, "shaped_reward");
    r.prior_nll = detail::parse_double(f[4], row, "prior_nll");
    r.agent_nll = detail::parse_double(f[5], row, "agent_nll");
    r.batch = detail::parse_uint(f[6], row, "batch");
    if (!log.records.empty() && r.index <= log.records.back().index) {
      throw Error("run log row " + std::to_string(row) + ": index not increasing");
    }
    log.records.push_back(std::move(r));
  }
  return log;
}

}  // namespace rfg::metrics
