#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include "drainguard/errors.hpp"
#include "drainguard/extended_real.hpp"

namespace drainguard {

// 17 significant digits round-trip every double; infinities print as inf.
inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_number(const ExtendedReal& x) {
  return x.finite() ? format_number(x.value()) : "inf";
}

// Fewest digits that still parse back to the same double; for terminal output.
inline std::string format_shortest(double x) {
  if (!std::isfinite(x)) return format_number(x);
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    row(header);
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  void row(std::initializer_list<std::string_view> cells) {
    bool first = true;
    for (auto c : cells) {
      out_ << (first ? "" : ",") << c;
      first = false;
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw ConfigError("write failed for " + path_.string());
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  template <class T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else if constexpr (std::is_floating_point_v<T> || std::is_same_v<T, ExtendedReal>) {
      return format_number(v);
    } else {
      return std::string(v);
    }
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace drainguard
