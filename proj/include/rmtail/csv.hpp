#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace rmtail {

/// Fixed 17-significant-digit rendering.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  return fmt::format("{:.16e}", x);
}

/// "# key=value key=value" provenance line.
inline void write_comment(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& fields) {
  os << '#';
  for (const auto& [k, v] : fields) os << ' ' << k << '=' << v;
  os << '\n';
}

inline void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}

}  // namespace rmtail
