#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>

#include "gpfree/error.hpp"

namespace gpfree {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline constexpr u64 kU64Max = std::numeric_limits<u64>::max();

// a*b, or nullopt on 64-bit overflow.
constexpr std::optional<u64> checked_mul(u64 a, u64 b) {
  u64 r = 0;
  if (__builtin_mul_overflow(a, b, &r)) return std::nullopt;
  return r;
}

constexpr std::optional<u64> checked_pow(u64 base, unsigned exp) {
  u64 r = 1;
  for (unsigned e = 0; e < exp; ++e) {
    auto next = checked_mul(r, base);
    if (!next) return std::nullopt;
    r = *next;
  }
  return r;
}

// base^exp saturated at kU64Max; handy for loop bounds.
constexpr u64 sat_pow(u64 base, unsigned exp) {
  return checked_pow(base, exp).value_or(kU64Max);
}

constexpr u64 mul_or_throw(u64 a, u64 b) {
  auto r = checked_mul(a, b);
  if (!r) throw DomainError("64-bit overflow");
  return *r;
}

constexpr u64 isqrt(u64 n) {
  if (n < 2) return n;
  u64 r = 1;
  u64 lo = 1, hi = std::uint64_t{1} << 32;
  while (lo < hi) {
    u64 mid = lo + (hi - lo) / 2;
    if (static_cast<u128>(mid) * mid <= n) {
      r = mid;
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return r;
}

// Largest r with r^k <= n (k >= 1).
constexpr u64 iroot(u64 n, unsigned k) {
  if (k == 1 || n < 2) return n;
  if (k == 2) return isqrt(n);
  u64 lo = 1, hi = 1;
  while (checked_pow(hi, k).value_or(kU64Max) <= n && hi < (u64{1} << 32)) hi *= 2;
  // invariant: lo^k <= n < hi^k
  while (hi - lo > 1) {
    u64 mid = lo + (hi - lo) / 2;
    auto p = checked_pow(mid, k);
    if (p && *p <= n) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

constexpr bool is_perfect_square(u64 n) {
  u64 r = isqrt(n);
  return r * r == n;
}

constexpr u64 mulmod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

constexpr u64 powmod(u64 base, u64 exp, u64 m) {
  u64 r = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin for all 64-bit n.
constexpr bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2, 325, 9375, 28178, 450775, 9780504, 1795265022}) {
    u64 x = powmod(a % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace gpfree
