#pragma once

#include <charconv>
#include <string>

namespace ipd {

/// Shortest decimal text that round-trips to `x` ("0.3", "1", "0.05").
inline std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Fixed-precision text for CSV summaries.
inline std::string format_fixed(double x, int precision = 6) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

}  // namespace ipd
