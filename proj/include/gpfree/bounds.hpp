#pragma once

// Closed-form constants and gap envelopes. All logarithms are natural.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>

#include "gpfree/error.hpp"

namespace gpfree::bounds {

// Anything with log log x is defined from x = 16 on (16 > e^e).
inline constexpr double kMinX = 16.0;

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  friend bool operator==(const Rational&, const Rational&) = default;
};

// C_{i,j} = q log 2 with q = 1/i + 1/j; returns q in lowest terms.
inline Rational c_ij_coefficient(unsigned i, unsigned j) {
  if (i == 0 || j == 0) throw DomainError("C_ij: i and j must be >= 1");
  std::int64_t num = static_cast<std::int64_t>(i) + j;
  std::int64_t den = static_cast<std::int64_t>(i) * j;
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

inline double c_ij(unsigned i, unsigned j) {
  const Rational q = c_ij_coefficient(i, j);
  return std::numbers::ln2 * static_cast<double>(q.num) / static_cast<double>(q.den);
}

namespace detail {
inline void require_log_log_domain(double x, const char* what) {
  if (!(x >= kMinX)) throw DomainError(std::string(what) + ": x must be >= 16");
}
inline double log_ratio(double x) { return std::log(x) / std::log(std::log(x)); }
}  // namespace detail

// exp((C_{i,j} + 2 eps) log x / log log x)
inline double h_short(double x, unsigned i, unsigned j, double epsilon) {
  detail::require_log_log_domain(x, "h_short");
  return std::exp((c_ij(i, j) + 2.0 * epsilon) * detail::log_ratio(x));
}

// C_eps exp((C_{2,3} + eps) log x / log log x)
inline double gap_envelope(double x, double epsilon, double c_eps) {
  detail::require_log_log_domain(x, "gap_envelope");
  return c_eps * std::exp((c_ij(2, 3) + epsilon) * detail::log_ratio(x));
}

// exp(-C E exp((C_{2,3} + eps) log x / log log x))
inline double survival_bound(double x, double c, double e, double epsilon) {
  detail::require_log_log_domain(x, "survival_bound");
  return std::exp(-c * e * std::exp((c_ij(2, 3) + epsilon) * detail::log_ratio(x)));
}

// Default removal bias 1 - 1/log(x + 2).
inline double p_default(std::uint64_t x) {
  if (x < 2) throw DomainError("p_default: x must be >= 2");
  return 1.0 - 1.0 / std::log(static_cast<double>(x) + 2.0);
}

}  // namespace gpfree::bounds
