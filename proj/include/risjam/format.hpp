#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace risjam {

/// Fixed textual form for numbers in emitted CSV files.
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace risjam
