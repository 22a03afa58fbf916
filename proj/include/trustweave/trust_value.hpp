#pragma once

#include <charconv>
#include <compare>
#include <stdexcept>
#include <string>

namespace trustweave {

/// A trust rating on the closed unit interval. Construction outside
/// [0,1] is rejected.
class TrustValue {
 public:
  TrustValue() = default;

  explicit TrustValue(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("trust value outside [0,1]: " +
                                  std::to_string(v));
  }

  double get() const { return value_; }

  /// Clamping constructor for arithmetic that may drift past the bounds.
  static TrustValue clamped(double v) {
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return TrustValue(v);
  }

  auto operator<=>(const TrustValue&) const = default;

 private:
  double value_ = 0.0;
};

/// Shortest round-trip decimal form, used everywhere a value is
/// serialized so that output is byte-stable.
inline std::string format_value(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::string format_value(TrustValue v) { return format_value(v.get()); }

}  // namespace trustweave
