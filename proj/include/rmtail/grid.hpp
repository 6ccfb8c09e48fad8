#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "rmtail/errors.hpp"

namespace rmtail {

/// Evaluation grid "lo:hi:count[:log]", inclusive of both ends.
struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;
  bool log = false;

  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      out.push_back(log ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    if (count > 1) out.back() = hi;
    return out;
  }

  std::string str() const {
    return fmt::format("{}:{}:{}{}", lo, hi, count, log ? ":log" : "");
  }
};

namespace detail {

inline double parse_grid_number(const std::string& s, std::string_view spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw domain_error("malformed grid spec '" + std::string(spec) + "': bad number '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v))
    throw domain_error("malformed grid spec '" + std::string(spec) + "': bad number '" + s + "'");
  return v;
}

}  // namespace detail

inline GridSpec parse_grid(std::string_view spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3 || parts.size() > 4)
    throw domain_error("malformed grid spec '" + std::string(spec) + "': expected lo:hi:count[:log]");
  GridSpec g;
  g.lo = detail::parse_grid_number(parts[0], spec);
  g.hi = detail::parse_grid_number(parts[1], spec);
  const double n = detail::parse_grid_number(parts[2], spec);
  if (n < 1 || n != std::floor(n) || n > 1e7)
    throw domain_error("malformed grid spec '" + std::string(spec) + "': count must be a positive integer");
  g.count = static_cast<int>(n);
  if (parts.size() == 4) {
    if (parts[3] != "log") throw domain_error("malformed grid spec '" + std::string(spec) + "': unknown flag '" + parts[3] + "'");
    g.log = true;
    if (!(g.lo > 0 && g.hi > 0)) throw domain_error("malformed grid spec '" + std::string(spec) + "': log grid needs lo, hi > 0");
  }
  if (g.hi < g.lo) throw domain_error("malformed grid spec '" + std::string(spec) + "': hi < lo");
  if (g.count > 1 && g.hi == g.lo) throw domain_error("malformed grid spec '" + std::string(spec) + "': empty range");
  return g;
}

}  // namespace rmtail
