#pragma once

// Divisor-counting functions d_k(n) (number of k-th powers dividing n) and
// d_{i,j}(n) (number of pairs (a,b) with a^i b^j | n), evaluated pointwise
// through factorization or in bulk by a segmented sieve, plus the weighted
// short-interval sums built on them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gpfree/arith.hpp"
#include "gpfree/error.hpp"

namespace gpfree {

struct PrimePower {
  u64 prime = 0;
  unsigned exponent = 0;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

// Primes strictly increasing, exponents >= 1. Empty for n = 1.
struct Factorization {
  std::vector<PrimePower> factors;

  u64 value() const {
    u64 n = 1;
    for (const auto& f : factors) n = mul_or_throw(n, sat_pow(f.prime, f.exponent));
    return n;
  }
  friend bool operator==(const Factorization&, const Factorization&) = default;
};

namespace detail {

inline u64 pollard_brent(u64 n, u64 seed) {
  if (n % 2 == 0) return 2;
  u64 c = seed % (n - 1) + 1;
  u64 y = seed % n, m = 128, g = 1, r = 1, q = 1, x = 0, ys = 0;
  auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
  do {
    x = y;
    for (u64 i = 0; i < r; ++i) y = f(y);
    u64 k = 0;
    do {
      ys = y;
      for (u64 i = 0; i < std::min(m, r - k); ++i) {
        y = f(y);
        q = mulmod(q, x > y ? x - y : y - x, n);
      }
      g = std::gcd(q, n);
      k += m;
    } while (k < r && g == 1);
    r *= 2;
  } while (g == 1);
  if (g == n) {
    do {
      ys = f(ys);
      g = std::gcd(x > ys ? x - ys : ys - x, n);
    } while (g == 1);
  }
  return g;
}

inline void split_prime_factors(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  u64 d = n;
  for (u64 seed = 1; d == n; ++seed) d = pollard_brent(n, seed);
  split_prime_factors(d, out);
  split_prime_factors(n / d, out);
}

}  // namespace detail

inline Factorization factorize(u64 n) {
  if (n == 0) throw DomainError("factorize: n must be positive");
  std::vector<u64> primes;
  for (u64 p = 2; p < 64 && p * p <= n; ++p) {
    while (n % p == 0) {
      primes.push_back(p);
      n /= p;
    }
  }
  detail::split_prime_factors(n, primes);
  std::sort(primes.begin(), primes.end());
  Factorization fac;
  for (u64 p : primes) {
    if (!fac.factors.empty() && fac.factors.back().prime == p) {
      ++fac.factors.back().exponent;
    } else {
      fac.factors.push_back({p, 1});
    }
  }
  return fac;
}

// All positive divisors, ascending.
inline std::vector<u64> divisors(const Factorization& fac) {
  std::vector<u64> ds{1};
  for (const auto& [p, e] : fac.factors) {
    const std::size_t base = ds.size();
    u64 pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t t = 0; t < base; ++t) ds.push_back(ds[t] * pk);
    }
  }
  std::sort(ds.begin(), ds.end());
  return ds;
}

// Which divisor-counting function a table holds: d_k, or d_{i,j}.
struct DivisorSpec {
  enum class Kind { Single, Pair };
  Kind kind = Kind::Single;
  unsigned i = 1;
  unsigned j = 1;

  static DivisorSpec single(unsigned k) {
    if (k == 0) throw DomainError("d_k: k must be >= 1");
    return {Kind::Single, k, 0};
  }
  static DivisorSpec pair(unsigned i, unsigned j) {
    if (i == 0 || j == 0) throw DomainError("d_ij: i and j must be >= 1");
    return {Kind::Pair, i, j};
  }

  // Contribution of an exact prime power p^alpha (independent of p).
  u64 local(unsigned alpha) const {
    if (kind == Kind::Single) return alpha / i + 1;
    // #{(e,f) >= 0 : i*e + j*f <= alpha}
    u64 count = 0;
    for (unsigned used = 0; used <= alpha; used += i) count += (alpha - used) / j + 1;
    return count;
  }

  std::string name() const {
    if (kind == Kind::Single) return "d_" + std::to_string(i);
    return "d_" + std::to_string(i) + "," + std::to_string(j);
  }

  friend bool operator==(const DivisorSpec&, const DivisorSpec&) = default;
};

inline u64 evaluate(const DivisorSpec& spec, const Factorization& fac) {
  u64 v = 1;
  for (const auto& f : fac.factors) v *= spec.local(f.exponent);
  return v;
}

inline u64 d_k(u64 n, unsigned k) { return evaluate(DivisorSpec::single(k), factorize(n)); }

inline u64 d_ij(u64 n, unsigned i, unsigned j) {
  return evaluate(DivisorSpec::pair(i, j), factorize(n));
}

// The half-open integer interval (start, start + length].
struct Interval {
  u64 start = 0;
  u64 length = 1;

  u64 first() const { return start + 1; }
  u64 last() const { return start + length; }

  void validate() const {
    if (length == 0) throw DomainError("interval length must be >= 1");
    if (start > kU64Max - length) throw DomainError("interval end exceeds 64 bits");
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct DivisorTable {
  Interval interval;
  DivisorSpec spec;
  std::vector<u64> values;  // values[t] = d_spec(interval.first() + t)

  u64 at(u64 n) const { return values.at(n - interval.first()); }
  u64 sum() const { return std::accumulate(values.begin(), values.end(), u64{0}); }
};

struct SieveLimits {
  u64 max_length = u64{1} << 26;
  u64 max_prime_bound = 100'000'000;
};

// Sieve of Eratosthenes; primes <= limit, ascending.
inline std::vector<u64> primes_up_to(u64 limit) {
  std::vector<u64> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (u64 p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    primes.push_back(p);
    if (p <= limit / p) {
      for (u64 m = p * p; m <= limit; m += p) composite[m] = true;
    }
  }
  return primes;
}

// Segmented sieve over (x, x+h]: only primes up to sqrt(x+h) are walked; a
// residual cofactor > 1 left after that is a single prime of exponent 1.
inline DivisorTable sieve(const Interval& interval, const DivisorSpec& spec,
                          const SieveLimits& limits = {}) {
  interval.validate();
  if (interval.length > limits.max_length) {
    throw ResourceLimit("sieve: interval length " + std::to_string(interval.length) +
                        " exceeds budget " + std::to_string(limits.max_length));
  }
  const u64 root = isqrt(interval.last());
  if (root > limits.max_prime_bound) {
    throw ResourceLimit("sieve: sqrt of interval end exceeds prime bound budget");
  }
  const u64 h = interval.length;
  std::vector<u64> rem(h);
  std::vector<u64> vals(h, 1);
  for (u64 t = 0; t < h; ++t) rem[t] = interval.first() + t;

  for (u64 p : primes_up_to(root)) {
    const u64 first_multiple = (interval.first() + p - 1) / p * p;
    for (u64 t = first_multiple - interval.first(); t < h; t += p) {
      unsigned alpha = 0;
      u64 r = rem[t];
      while (r % p == 0) {
        r /= p;
        ++alpha;
      }
      rem[t] = r;
      vals[t] *= spec.local(alpha);
    }
  }
  const u64 tail = spec.local(1);
  for (u64 t = 0; t < h; ++t) {
    if (rem[t] > 1) vals[t] *= tail;
  }
  return {interval, spec, std::move(vals)};
}

// S_{i,j}(x,h,D) = sum over x < n <= x+h of exp(-D d_{i,j}(n)), accumulated
// in long double in ascending n.
inline long double weighted_sum(const DivisorTable& table, long double D) {
  long double s = 0.0L;
  for (u64 v : table.values) s += std::exp(-D * static_cast<long double>(v));
  return s;
}

inline long double sum_S(const Interval& interval, unsigned i, unsigned j, long double D,
                         const SieveLimits& limits = {}) {
  if (!(D > 0)) throw DomainError("sum_S: D must be positive");
  return weighted_sum(sieve(interval, DivisorSpec::pair(i, j), limits), D);
}

// Jensen's lower bound h * exp(-(D/h) * sum d) for the same table.
inline long double jensen_bound(const DivisorTable& table, long double D) {
  const auto h = static_cast<long double>(table.values.size());
  long double total = 0.0L;
  for (u64 v : table.values) total += static_cast<long double>(v);
  return h * std::exp(-(D / h) * total);
}

// Sum of 1/p over primes p <= x.
inline long double mertens_sum(u64 x, u64 cap = 100'000'000) {
  if (x < 3) throw DomainError("mertens_sum: x must be >= 3");
  if (x > cap) throw ResourceLimit("mertens_sum: x exceeds cap " + std::to_string(cap));
  long double s = 0.0L;
  for (u64 p : primes_up_to(x)) s += 1.0L / static_cast<long double>(p);
  return s;
}

}  // namespace gpfree
