#pragma once

#include <cstdio>
#include <string>

namespace nlpb::csv {

/// Shortest round-trippable text for a double (17 significant digits).
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace nlpb::csv
