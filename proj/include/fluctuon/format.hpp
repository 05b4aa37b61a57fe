#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace fluctuon {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

}  // namespace fluctuon
