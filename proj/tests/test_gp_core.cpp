#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gpfree/divisor.hpp"
#include "gpfree/gp_core.hpp"
#include "oracles.hpp"

using namespace gpfree;

namespace {

std::vector<u64> v(std::initializer_list<u64> xs) { return xs; }

}  // namespace

TEST(Terms, Examples) {
  EXPECT_EQ(terms(KGeoProgression::make(6, 1, 1, 2)), v({1, 2, 4, 8, 16, 32}));
  EXPECT_EQ(terms(KGeoProgression::make(6, 1, 2, 3)), v({32, 48, 72, 108, 162, 243}));
  EXPECT_EQ(terms(KGeoProgression::make(5, 1, 1, 2)), v({1, 2, 4, 8, 16}));
}

TEST(Terms, InvariantsAreEnforced) {
  EXPECT_THROW(KGeoProgression::make(2, 1, 1, 2), DomainError);
  EXPECT_THROW(KGeoProgression::make(3, 1, 2, 2), DomainError);
  EXPECT_THROW(KGeoProgression::make(3, 1, 3, 2), DomainError);
  EXPECT_THROW(KGeoProgression::make(3, 1, 2, 4), DomainError);  // not lowest terms
  EXPECT_THROW(KGeoProgression::make(3, 0, 1, 2), DomainError);
  EXPECT_THROW(KGeoProgression::make(6, 1, 1, 1u << 13), DomainError);  // c^5 > 2^64
  EXPECT_THROW(IntRatio3GP::make(1, 1), DomainError);
  EXPECT_EQ(IntRatio3GP::make(3, 2).as_progression().terms(), v({3, 6, 12}));
}

TEST(Canonicalize, Examples) {
  EXPECT_EQ(canonicalize(v({32, 48, 72, 108, 162, 243})), KGeoProgression::make(6, 1, 2, 3));
  EXPECT_EQ(canonicalize(v({1, 2, 4})), KGeoProgression::make(3, 1, 1, 2));
  EXPECT_THROW(canonicalize(v({2, 3, 5})), NotAGeometricProgression);
  EXPECT_THROW(canonicalize(v({7, 7, 7})), TrivialProgression);
  EXPECT_THROW(canonicalize(v({2, 3})), DomainError);
  // ratio 3/2 but 2^2 does not divide 6: (6, 9, 13.5) is not integral
  EXPECT_THROW(canonicalize(v({6, 9, 13})), NotAGeometricProgression);
  EXPECT_THROW(canonicalize(v({9, 6, 4})), NotAGeometricProgression);
}

TEST(Canonicalize, RoundTripsEveryProgressionUpToAMillion) {
  // Sampled over all (k, b, c) shapes; a runs over a stride so the last
  // term reaches 10^6.
  std::mt19937_64 rng(7);
  int checked = 0;
  for (unsigned k = 3; k <= 6; ++k) {
    for (u64 c = 2; sat_pow(c, k - 1) <= 1'000'000; ++c) {
      for (u64 b = 1; b < c; ++b) {
        if (std::gcd(b, c) != 1) continue;
        const u64 amax = 1'000'000 / sat_pow(c, k - 1);
        for (u64 a : {u64{1}, amax, std::uniform_int_distribution<u64>(1, amax)(rng)}) {
          const auto gp = KGeoProgression::make(k, a, b, c);
          ASSERT_EQ(canonicalize(gp.terms()), gp);
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(EnumerateGps, FirstTermBoundedStreamMatchesBruteForcePrefix) {
  // Position 0 leaves c unconstrained, so compare the part of the stream
  // with last term <= 10^4 against brute force over term tuples.
  // k = 3 is skipped: its t0 = 1 stream alone runs to c = 2^32.
  for (unsigned k = 4; k <= 6; ++k) {
    std::vector<std::vector<u64>> got;
    for_each_gp(k, 0, 4, [&](const KGeoProgression& gp) {
      if (gp.term(k - 1) <= 10'000) got.push_back(gp.terms());
    });
    EXPECT_EQ(got, oracle::gp_term_tuples(k, 4, 10'000)) << "k=" << k;
  }
  std::vector<KGeoProgression> head;
  for_each_gp(3, 0, 4, [&](const KGeoProgression& gp) {
    head.push_back(gp);
    return head.size() < 3;
  });
  ASSERT_EQ(head.size(), 3u);
  EXPECT_EQ(head[0].terms(), v({1, 2, 4}));
  EXPECT_EQ(head[1].terms(), v({1, 3, 9}));
  EXPECT_EQ(head[2].terms(), v({1, 4, 16}));
}

TEST(EnumerateGps, ExamplesAtMiddlePosition) {
  const auto gps = enumerate_gps(6, 2, 72);
  auto has = [&](u64 a, u64 b, u64 c) {
    return std::find(gps.begin(), gps.end(), KGeoProgression{6, a, b, c}) != gps.end();
  };
  EXPECT_TRUE(has(1, 2, 3));
  EXPECT_TRUE(has(18, 1, 2));
  EXPECT_TRUE(enumerate_gps(6, 0, 0).empty());
  EXPECT_THROW(enumerate_gps(2, 0, 5), DomainError);
  EXPECT_THROW(enumerate_gps(4, 4, 5), DomainError);
  EXPECT_THROW(enumerate_gps(3, 1, 1000, 10), ResourceLimit);
}

TEST(EnumerateGps, LexicographicAndUniqueForAllPositions) {
  // Exhaustive for k = 3..6 at bound 10^4, positions >= 1.
  for (unsigned k = 3; k <= 6; ++k) {
    for (unsigned pos = 1; pos < k; ++pos) {
      const auto gps = enumerate_gps(k, pos, 10'000);
      std::vector<std::vector<u64>> tuples;
      for (const auto& gp : gps) {
        ASSERT_LE(gp.term(pos), 10'000u);
        tuples.push_back(gp.terms());
      }
      EXPECT_TRUE(std::is_sorted(tuples.begin(), tuples.end())) << k << "," << pos;
      EXPECT_EQ(std::adjacent_find(tuples.begin(), tuples.end()), tuples.end());
      // The unordered walk covers the same family.
      std::set<std::tuple<u64, u64, u64>> walked;
      for_each_gp_unordered(k, pos, 10'000, [&](u64 a, u64 b, u64 c) {
        const u64 ck = sat_pow(c, k - 1);
        if (ck != kU64Max && checked_mul(a, ck)) walked.emplace(a, b, c);
      });
      std::set<std::tuple<u64, u64, u64>> listed;
      for (const auto& gp : gps) listed.emplace(gp.a, gp.b, gp.c);
      EXPECT_EQ(walked, listed) << k << "," << pos;
    }
  }
}

TEST(EnumerateGps, MatchesBruteForceTupleScan) {
  // k = 4, position 3 (last term) <= 2000 against brute-force tuple search.
  std::vector<std::vector<u64>> got;
  for (const auto& gp : enumerate_gps(4, 3, 2000)) got.push_back(gp.terms());
  EXPECT_EQ(got, oracle::gp_term_tuples(4, 2000, 2000));
}

TEST(FindGpsWithTermAt, Examples) {
  const auto gps = find_gps_with_term_at(72, 6, 2);
  const std::vector<KGeoProgression> expected{
      {6, 2, 1, 6}, {6, 8, 1, 3}, {6, 18, 1, 2}, {6, 1, 2, 3}};  // t0 = 2, 8, 18, 32
  EXPECT_EQ(gps, expected);
  EXPECT_LE(gps.size(), d_ij(72, 3, 2));
  EXPECT_EQ(d_ij(72, 3, 2), 6u);
  EXPECT_TRUE(find_gps_with_term_at(1, 6, 2).empty());
  EXPECT_THROW(find_gps_with_term_at(12, 6, 0), DomainError);
}

TEST(FindGpsWithTermAt, AgreesWithEnumeration) {
  for (unsigned k : {3U, 5U, 6U}) {
    for (unsigned pos = 1; pos < k; ++pos) {
      std::map<u64, std::vector<KGeoProgression>> by_term;
      for (const auto& gp : enumerate_gps(k, pos, 3000)) by_term[gp.term(pos)].push_back(gp);
      for (u64 n = 1; n <= 3000; ++n) {
        ASSERT_EQ(find_gps_with_term_at(n, k, pos), by_term[n]) << n << " k=" << k << " p=" << pos;
      }
    }
  }
}

TEST(FindGpsWithTermAt, CountBoundedByDivisorFunctions) {
  for (u64 n = 1; n <= 10'000; ++n) {
    const u64 d32 = d_ij(n, 3, 2);
    ASSERT_LE(find_gps_with_term_at(n, 6, 2).size(), d32) << n;
    ASSERT_LE(find_gps_with_term_at(n, 6, 3).size(), d32) << n;
    ASSERT_LE(find_gps_with_term_at(n, 5, 1).size(), d_ij(n, 3, 1)) << n;
    ASSERT_LE(find_gps_with_term_at(n, 5, 2).size(), d_ij(n, 2, 2)) << n;
  }
}

TEST(MiddleGap, IdentityForAllSixGpsUpTo1e5) {
  for_each_gp_unordered(6, 2, 100'000, [&](u64 a, u64 b, u64 c) {
    const KGeoProgression gp{6, a, b, c};
    const u64 gap = gp.term(3) - gp.term(2);
    ASSERT_EQ(gap, a * b * b * c * c * (c - b));
    ASSERT_GE(gap, a * b * b * c * c);
    // a b^2 c^2 >= sqrt(t_2) and >= sqrt(t_3)
    ASSERT_GE(static_cast<u128>(a * b * b * c * c) * (a * b * b * c * c), gp.term(3));
  });
}

TEST(ContainsGp, Examples) {
  auto w = contains_gp(v({1, 2, 3, 4}), 3);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->terms(), v({1, 2, 4}));
  w = contains_gp(v({4, 6, 9}), 3);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->terms(), v({4, 6, 9}));
  EXPECT_FALSE(contains_gp(v({4, 6, 9}), 3, RatioMode::Integer));
  EXPECT_FALSE(contains_gp(v({}), 3));
  EXPECT_FALSE(contains_gp(v({1, 2, 4, 8}), 5));
  EXPECT_TRUE(contains_gp(v({1, 2, 4, 8, 16}), 5));
}

TEST(ContainsGp, RoutesAgreeOnRandomSets) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const u64 max = std::uniform_int_distribution<u64>(10, 3000)(rng);
    const double density = std::uniform_real_distribution<double>(0.05, 0.9)(rng);
    std::vector<u64> set;
    for (u64 n = 1; n <= max; ++n) {
      if (std::bernoulli_distribution(density)(rng)) set.push_back(n);
    }
    for (unsigned k : {3U, 4U, 5U, 6U}) {
      for (auto mode : {RatioMode::Rational, RatioMode::Integer}) {
        const auto a = contains_gp_pairscan(set, k, mode);
        const auto b = contains_gp_enumerate(set, k, mode);
        ASSERT_EQ(a.has_value(), b.has_value()) << trial << " k=" << k;
        if (a) {
          ASSERT_EQ(*a, *b);
          for (u64 t : a->terms()) ASSERT_TRUE(std::binary_search(set.begin(), set.end(), t));
          if (mode == RatioMode::Integer) {
            ASSERT_EQ(a->b, 1u);
          }
        }
      }
    }
  }
}

TEST(Triples, Examples) {
  const std::vector<GPTriple> ten{{1, 2, 4}, {1, 3, 9}, {2, 4, 8}, {4, 6, 9}};
  EXPECT_EQ(enumerate_3gp_triples(10), ten);
  EXPECT_TRUE(enumerate_3gp_triples(3).empty());
}

TEST(Triples, MatchBruteForceAt640) {
  const auto got = enumerate_3gp_triples(640);
  const auto want = oracle::triples(640);
  ASSERT_EQ(got.size(), want.size());
  EXPECT_EQ(got.size(), 988u);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(std::make_tuple(got[i].x, got[i].y, got[i].z), want[i]);
  }
}

TEST(Triples, EquivalentToCanonicalThreeGps) {
  const auto triples = enumerate_3gp_triples(1000);
  const std::set<GPTriple> as_set(triples.begin(), triples.end());
  for (u64 x = 1; x <= 1000; ++x) {
    for (u64 z = x + 2; z <= 1000; ++z) {
      const u64 y = isqrt(x * z);
      if (y <= x || y >= z) continue;
      bool canon = true;
      try {
        canonicalize(v({x, y, z}));
      } catch (const NotAGeometricProgression&) {
        canon = false;
      } {
        
      }
      ASSERT_EQ(canon, as_set.count({x, y, z}) == 1) << x << " " << y << " " << z;
      if (canon) {
        ASSERT_NO_THROW(GPTriple::make(x, y, z));
      }
    }
  }
  EXPECT_THROW(GPTriple::make(2, 3, 5), NotAGeometricProgression);
}
