#pragma once

#include <cassert>
#include <compare>
#include <ostream>

namespace drainguard {

// A real number or +infinity. Infinity is a distinct state rather than a
// floating-point value, so callers must branch on finite() before using
// value().
class ExtendedReal {
 public:
  constexpr ExtendedReal(double v) : value_(v), finite_(true) {}  // NOLINT(implicit)

  static constexpr ExtendedReal infinity() { return ExtendedReal(); }

  constexpr bool finite() const { return finite_; }
  constexpr bool infinite() const { return !finite_; }

  constexpr double value() const {
    assert(finite_);
    return value_;
  }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.finite_ != b.finite_) return false;
    return !a.finite_ || a.value_ == b.value_;
  }

  friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a,
                                                     const ExtendedReal& b) {
    if (a.finite_ && b.finite_) return a.value_ <=> b.value_;
    if (a.finite_) return std::partial_ordering::less;
    if (b.finite_) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.finite_) return os << x.value_;
    return os << "inf";
  }

 private:
  constexpr ExtendedReal() : value_(0.0), finite_(false) {}

  double value_;
  bool finite_;
};

}  // namespace drainguard
