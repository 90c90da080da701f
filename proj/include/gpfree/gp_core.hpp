#pragma once

// Canonical geometric progressions of positive integers.
//
// A nontrivial k-term progression with rational ratio c/b > 1 in lowest terms
// is written uniquely as (a b^(k-1), a b^(k-2) c, ..., a c^(k-1)).

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "gpfree/arith.hpp"
#include "gpfree/bitmap.hpp"
#include "gpfree/divisor.hpp"
#include "gpfree/error.hpp"

namespace gpfree {

struct KGeoProgression {
  unsigned k = 3;
  u64 a = 1;
  u64 b = 1;
  u64 c = 2;

  static KGeoProgression make(unsigned k, u64 a, u64 b, u64 c) {
    KGeoProgression gp{k, a, b, c};
    gp.validate();
    return gp;
  }

  void validate() const {
    if (k < 3) throw DomainError("progression length must be >= 3");
    if (a == 0 || b == 0) throw DomainError("a and b must be positive");
    if (b >= c) throw DomainError("ratio c/b must exceed 1");
    if (std::gcd(b, c) != 1) throw DomainError("ratio c/b must be in lowest terms");
    if (!checked_mul(a, sat_pow(c, k - 1)) || !checked_pow(c, k - 1)) {
      throw DomainError("progression terms exceed 64 bits");
    }
  }

  // t_i = a b^(k-1-i) c^i; throws DomainError on overflow.
  u64 term(unsigned i) const {
    auto bp = checked_pow(b, k - 1 - i);
    auto cp = checked_pow(c, i);
    if (!bp || !cp) throw DomainError("progression term exceeds 64 bits");
    return mul_or_throw(a, mul_or_throw(*bp, *cp));
  }

  std::vector<u64> terms() const {
    std::vector<u64> out(k);
    for (unsigned i = 0; i < k; ++i) out[i] = term(i);
    return out;
  }

  friend bool operator==(const KGeoProgression&, const KGeoProgression&) = default;
};

inline std::vector<u64> terms(const KGeoProgression& gp) { return gp.terms(); }

// (a, a r, a r^2) with integer ratio r >= 2.
struct IntRatio3GP {
  u64 a = 1;
  u64 r = 2;

  static IntRatio3GP make(u64 a, u64 r) {
    if (a == 0) throw DomainError("a must be positive");
    if (r < 2) throw DomainError("integer ratio must be >= 2");
    return {a, r};
  }
  KGeoProgression as_progression() const { return {3, a, 1, r}; }
  friend bool operator==(const IntRatio3GP&, const IntRatio3GP&) = default;
};

// x < y < z with y^2 = x z.
struct GPTriple {
  u64 x = 0;
  u64 y = 0;
  u64 z = 0;

  static GPTriple make(u64 x, u64 y, u64 z) {
    if (!(x >= 1 && x < y && y < z)) throw DomainError("triple must satisfy 0 < x < y < z");
    if (static_cast<u128>(y) * y != static_cast<u128>(x) * z) {
      throw NotAGeometricProgression("triple does not satisfy y^2 = x z");
    }
    return {x, y, z};
  }
  friend auto operator<=>(const GPTriple&, const GPTriple&) = default;
};

// Inverse of terms(): the ratio t1/t0 in lowest terms is c/b and
// a = t0 / b^(k-1).
inline KGeoProgression canonicalize(std::span<const u64> seq) {
  if (seq.size() < 3) throw DomainError("canonicalize: need at least 3 terms");
  if (std::all_of(seq.begin(), seq.end(), [&](u64 t) { return t == seq[0]; })) {
    throw TrivialProgression("canonicalize: all terms equal");
  }
  if (seq[0] == 0) throw NotAGeometricProgression("canonicalize: terms must be positive");
  const u64 g = std::gcd(seq[0], seq[1]);
  const u64 b = seq[0] / g;
  const u64 c = seq[1] / g;
  if (b >= c) throw NotAGeometricProgression("canonicalize: sequence is not increasing");
  const auto k = static_cast<unsigned>(seq.size());
  auto bk = checked_pow(b, k - 1);
  if (!bk || seq[0] % *bk != 0) {
    throw NotAGeometricProgression("canonicalize: terms are not all integral");
  }
  const u64 a = seq[0] / *bk;
  // Each consecutive pair must keep the ratio: t_{i+1} b = t_i c.
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if (static_cast<u128>(seq[i + 1]) * b != static_cast<u128>(seq[i]) * c) {
      throw NotAGeometricProgression("canonicalize: consecutive ratios differ");
    }
  }
  return KGeoProgression{k, a, b, c};
}

inline KGeoProgression canonicalize(const std::vector<u64>& seq) {
  return canonicalize(std::span<const u64>(seq));
}

namespace detail {

template <class F, class... Args>
bool visit_continue(F& f, Args&&... args) {
  if constexpr (std::is_same_v<std::invoke_result_t<F&, Args...>, bool>) {
    return f(std::forward<Args>(args)...);
  } else {
    f(std::forward<Args>(args)...);
    return true;
  }
}

inline void check_shape(unsigned k, unsigned position) {
  if (k < 3) throw DomainError("k must be >= 3");
  if (position >= k) throw DomainError("position must be in 0..k-1");
}

}  // namespace detail

// Visits every canonical k-GP whose term at `position` is <= bound and whose
// terms all fit in 64 bits, in lexicographic order of the term tuples. The
// visitor may return bool; false stops the stream. For position 0 the family
// is enormous (c is unconstrained), so callers should stop early.
template <class Visit>
void for_each_gp(unsigned k, unsigned position, u64 bound, Visit&& visit) {
  detail::check_shape(k, position);
  // Term tuples order by (t0, t1): walk t0 ascending and merge, per b with
  // b^(k-1) | t0, the c-streams by t1 = t0 c / b.
  struct Cursor {
    u128 t1;
    u64 a, b, c;
    bool operator>(const Cursor& o) const { return t1 > o.t1; }
  };
  const auto term_p_fits = [&](u64 a, u64 b, u64 c) {
    auto bp = checked_pow(b, k - 1 - position);
    auto cp = checked_pow(c, position);
    if (!bp || !cp) return false;
    auto t = checked_mul(a, *bp);
    if (!t) return false;
    t = checked_mul(*t, *cp);
    return t && *t <= bound;
  };
  const auto representable = [&](u64 a, u64 c) {
    auto cp = checked_pow(c, k - 1);
    return cp && checked_mul(a, *cp).has_value();
  };
  // Next admissible c > from coprime to b, or 0 when the stream is done.
  const auto next_c = [&](u64 a, u64 b, u64 from) -> u64 {
    for (u64 c = from + 1;; ++c) {
      if (!representable(a, c) || !term_p_fits(a, b, c)) return 0;
      if (std::gcd(b, c) == 1) return c;
    }
  };
  std::priority_queue<Cursor, std::vector<Cursor>, std::greater<>> heap;
  for (u64 t0 = 1; t0 <= bound; ++t0) {
    for (u64 b = 1;; ++b) {
      auto bk = checked_pow(b, k - 1);
      if (!bk || *bk > t0) break;
      if (t0 % *bk != 0) continue;
      const u64 a = t0 / *bk;
      if (u64 c = next_c(a, b, b)) heap.push({static_cast<u128>(t0) / b * c, a, b, c});
    }
    while (!heap.empty()) {
      Cursor cur = heap.top();
      heap.pop();
      if (!detail::visit_continue(visit, KGeoProgression{k, cur.a, cur.b, cur.c})) return;
      if (u64 c = next_c(cur.a, cur.b, cur.c)) {
        heap.push({static_cast<u128>(t0) / cur.b * c, cur.a, cur.b, c});
      }
    }
  }
}

inline std::vector<KGeoProgression> enumerate_gps(unsigned k, unsigned position, u64 bound,
                                                  std::size_t max_count = 10'000'000) {
  std::vector<KGeoProgression> out;
  for_each_gp(k, position, bound, [&](const KGeoProgression& gp) {
    if (out.size() == max_count) {
      throw ResourceLimit("enumerate_gps: more than " + std::to_string(max_count) +
                          " progressions");
    }
    out.push_back(gp);
  });
  return out;
}

// Unordered, allocation-free walk over all canonical (a,b,c) with
// a b^(k-1-position) c^position <= bound, position >= 1. Terms other than
// the bounded one are not checked for 64-bit fit. Only a with
// a % stride == offset are visited, so workers can split the family.
template <class Visit>
void for_each_gp_unordered(unsigned k, unsigned position, u64 bound, Visit&& visit,
                           u64 stride = 1, u64 offset = 0) {
  detail::check_shape(k, position);
  if (position == 0) throw DomainError("unordered walk needs a position >= 1");
  const unsigned eb = k - 1 - position;
  for (u64 c = 2; sat_pow(c, position) <= bound; ++c) {
    const u64 cp = sat_pow(c, position);
    for (u64 b = 1; b < c; ++b) {
      const u64 base = mul_or_throw(sat_pow(b, eb), cp);
      if (base > bound) break;
      if (std::gcd(b, c) != 1) continue;
      const u64 amax = bound / base;
      for (u64 a = offset + 1; a <= amax; a += stride) visit(a, b, c);
    }
  }
}

namespace detail {
inline bool lex_less(const KGeoProgression& l, const KGeoProgression& r) {
  // (t0, t1) decides the tuple order; compare in 128 bits.
  const u128 l0 = static_cast<u128>(l.a) * sat_pow(l.b, l.k - 1);
  const u128 r0 = static_cast<u128>(r.a) * sat_pow(r.b, r.k - 1);
  if (l0 != r0) return l0 < r0;
  return static_cast<u128>(l.c) * r.b < static_cast<u128>(r.c) * l.b;
}
}  // namespace detail

// Every canonical k-GP whose term at `position` equals n, in lexicographic
// order. Position 0 is rejected: n = a b^(k-1) leaves c unconstrained.
inline std::vector<KGeoProgression> find_gps_with_term_at(u64 n, unsigned k, unsigned position) {
  detail::check_shape(k, position);
  if (n == 0) throw DomainError("n must be positive");
  if (position == 0) {
    throw DomainError("position 0 admits infinitely many progressions through n");
  }
  const unsigned eb = k - 1 - position;
  const auto divs = divisors(factorize(n));
  std::vector<KGeoProgression> out;
  for (u64 c : divs) {
    if (c < 2) continue;
    auto cp = checked_pow(c, position);
    if (!cp || n % *cp != 0) continue;
    const u64 m = n / *cp;
    if (eb == 0) {
      for (u64 b = 1; b < c; ++b) {
        if (std::gcd(b, c) == 1) out.push_back({k, m, b, c});
      }
      continue;
    }
    for (u64 b : divs) {
      if (b >= c) break;
      if (std::gcd(b, c) != 1) continue;
      auto bp = checked_pow(b, eb);
      if (!bp || m % *bp != 0) continue;
      out.push_back({k, m / *bp, b, c});
    }
  }
  std::sort(out.begin(), out.end(), detail::lex_less);
  return out;
}

enum class RatioMode { Rational, Integer };

namespace detail {

// Tries to extend (x, y) to k terms inside the set; b^(k-1) | x is required
// for the progression to stay integral.
template <class Member>
std::optional<KGeoProgression> extend_pair(u64 x, u64 y, unsigned k, RatioMode mode, u64 max,
                                           Member&& member) {
  const u64 g = std::gcd(x, y);
  const u64 b = x / g, c = y / g;
  if (mode == RatioMode::Integer && b != 1) return std::nullopt;
  auto bk = checked_pow(b, k - 1);
  if (!bk || x % *bk != 0) return std::nullopt;
  KGeoProgression gp{k, x / *bk, b, c};
  u64 t = y;
  for (unsigned i = 2; i < k; ++i) {
    auto next = checked_mul(t / b, c);  // b | t since b^(k-1-i) divides it
    if (!next || *next > max || !member(*next)) return std::nullopt;
    t = *next;
  }
  return gp;
}

}  // namespace detail

// Pair-scanning route: for each x < y in the set, extend by ratio y/x. The
// inner loop stops once x (y/x)^(k-1) exceeds the set maximum.
inline std::optional<KGeoProgression> contains_gp_pairscan(std::span<const u64> set, unsigned k,
                                                           RatioMode mode) {
  if (k < 3) throw DomainError("k must be >= 3");
  if (set.size() < k) return std::nullopt;
  const u64 max = set.back();
  const auto member = [&](u64 v) { return std::binary_search(set.begin(), set.end(), v); };
  for (std::size_t i = 0; i < set.size(); ++i) {
    const u64 x = set[i];
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      const u64 y = set[j];
      // last term x (y/x)^(k-1) > max  <=>  y^(k-1) > max x^(k-2)
      const long double last =
          static_cast<long double>(x) *
          std::pow(static_cast<long double>(y) / static_cast<long double>(x), k - 1);
      if (last > static_cast<long double>(max) * (1.0L + 1e-15L) + 1.0L) break;
      if (auto gp = detail::extend_pair(x, y, k, mode, max, member)) return gp;
    }
  }
  return std::nullopt;
}

// Enumeration route: walk every canonical GP with last term <= max(set) and
// test membership in a bitmap. Returns the lexicographically first witness.
inline std::optional<KGeoProgression> contains_gp_enumerate(std::span<const u64> set, unsigned k,
                                                            RatioMode mode) {
  if (k < 3) throw DomainError("k must be >= 3");
  if (set.size() < k) return std::nullopt;
  const u64 max = set.back();
  Bitmap in(max);
  for (u64 v : set) in.set(v);
  std::optional<KGeoProgression> best;
  for (u64 c = 2; sat_pow(c, k - 1) <= max; ++c) {
    const u64 ck = sat_pow(c, k - 1);
    const u64 bmax = mode == RatioMode::Integer ? 1 : c - 1;
    for (u64 b = 1; b <= bmax; ++b) {
      if (std::gcd(b, c) != 1) continue;
      for (u64 a = 1; a <= max / ck; ++a) {
        KGeoProgression gp{k, a, b, c};
        bool all = true;
        for (unsigned i = 0; i < k && all; ++i) all = in.test(gp.term(i));
        if (all && (!best || detail::lex_less(gp, *best))) best = gp;
      }
    }
  }
  return best;
}

// Some nontrivial k-GP entirely inside the sorted, deduplicated set (the
// lexicographically first one), or nullopt. Integer mode admits b = 1 only.
inline std::optional<KGeoProgression> contains_gp(std::span<const u64> set, unsigned k,
                                                  RatioMode mode = RatioMode::Rational) {
  if (k < 3) throw DomainError("k must be >= 3");
  if (set.size() < k) return std::nullopt;
  const u64 max = set.back();
  // The enumeration touches roughly max*log(max) candidates; dense sets
  // with moderate maxima favor it over pair scanning.
  const bool dense = max <= (u64{1} << 30) && set.size() * 8 >= max / 64;
  return dense ? contains_gp_enumerate(set, k, mode) : contains_gp_pairscan(set, k, mode);
}

inline std::optional<KGeoProgression> contains_gp(const std::vector<u64>& set, unsigned k,
                                                  RatioMode mode = RatioMode::Rational) {
  return contains_gp(std::span<const u64>(set), k, mode);
}

// All x < y < z <= n with y^2 = x z, sorted.
inline std::vector<GPTriple> enumerate_3gp_triples(u64 n) {
  std::vector<GPTriple> out;
  for (u64 c = 2; c * c <= n; ++c) {
    for (u64 b = 1; b < c; ++b) {
      if (std::gcd(b, c) != 1) continue;
      for (u64 a = 1; a * c * c <= n; ++a) out.push_back({a * b * b, a * b * c, a * c * c});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gpfree
