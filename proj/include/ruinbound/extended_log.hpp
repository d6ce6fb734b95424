#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <span>
#include <stdexcept>

namespace ruinbound {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Logarithm of an expectation E e^{hY} in (0, +inf]. The value is either a
// finite real or +inf; +inf is absorbing under addition and NaN is rejected.
class ExtendedLogValue {
 public:
  constexpr ExtendedLogValue() = default;

  explicit ExtendedLogValue(double log_value) : value_(log_value) {
    if (std::isnan(log_value) || log_value == -kInf) {
      throw std::domain_error("ExtendedLogValue must be a finite real or +inf");
    }
  }

  static ExtendedLogValue infinite() { return ExtendedLogValue(kInf); }

  bool is_infinite() const { return value_ == kInf; }
  bool is_finite() const { return value_ != kInf; }
  double value() const { return value_; }
  double linear() const { return std::exp(value_); }

  ExtendedLogValue& operator+=(const ExtendedLogValue& other) {
    value_ = (is_infinite() || other.is_infinite()) ? kInf : value_ + other.value_;
    return *this;
  }

  friend ExtendedLogValue operator+(ExtendedLogValue a, const ExtendedLogValue& b) {
    return a += b;
  }
  friend bool operator==(const ExtendedLogValue&, const ExtendedLogValue&) = default;
  friend std::partial_ordering operator<=>(const ExtendedLogValue& a,
                                           const ExtendedLogValue& b) {
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
};

// log(e^a + e^b) for a, b in [-inf, +inf].
inline double log_add_exp(double a, double b) {
  if (a == kInf || b == kInf) return kInf;
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -kInf;
  const double hi = *std::max_element(values.begin(), values.end());
  if (hi == kInf) return kInf;
  if (hi == -kInf) return -kInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

// log((e^x - 1) / x), the log-MGF kernel of a unit uniform; stable for all x.
inline double log_expm1_ratio(double x) {
  if (std::abs(x) < 1e-6) return x / 2.0 + x * x / 24.0;
  if (x > 0) return x + std::log(-std::expm1(-x)) - std::log(x);
  return std::log(-std::expm1(x)) - std::log(-x);
}

// log(1 - e^x) for x < 0.
inline double log1m_exp(double x) {
  return x > -0.6931471805599453 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

inline constexpr double kLog10E = 0.43429448190325182765;

}  // namespace ruinbound
