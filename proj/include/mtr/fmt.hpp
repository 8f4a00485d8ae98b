#pragma once

#include <charconv>
#include <string>

namespace mtr {

// Shortest round-trip decimal representation; locale-free and byte-stable,
// used for every number the project writes to CSV/JSON/SVG.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace mtr
