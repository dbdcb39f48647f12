// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>

namespace der {

// Shortest decimal form that parses back to the same double. Canonical file
// formats depend on this being stable, so no locale-dependent formatting here.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// 12 significant digits, used for all CSV/report output.
inline std::string format_sig12(double v) {
  char buf[48];
  int n = std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

inline std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char esc[8];
          std::snprintf(esc, sizeof(esc), "\\u%04x", static_cast<unsigned>(c));
          out += esc;
        } else {
          out += c;
        }
        break;
    }
  }
  return out;
}

}  // namespace der
