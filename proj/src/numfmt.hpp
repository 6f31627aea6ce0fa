#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <system_error>

namespace clockshift::numfmt {

/// Shortest decimal that parses back to exactly x.
inline std::string shortest(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) return std::to_string(x);
  return std::string(buf, end);
}

/// Shortest decimal d such that d * scale, computed in double, is exactly x.
/// Used to write values held in SI units back out in file units.
inline std::string shortest_scaled(double x, double scale) {
  const double y = x / scale;
  char buf[64];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof(buf), "%.*g", p, y);
    double back = 0.0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back * scale == x) return buf;
  }
  return shortest(y);
}

}  // namespace clockshift::numfmt
