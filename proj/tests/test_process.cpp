#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "gpfree/divisor.hpp"
#include "gpfree/io.hpp"
#include "gpfree/process.hpp"
#include "oracles.hpp"

using namespace gpfree;
using namespace gpfree::process;

namespace {

const ProcessKind kKinds[] = {ProcessKind::SixGP, ProcessKind::FiveGP, ProcessKind::ThreeGPInt};

ProcessRun run(ProcessKind kind, u64 n, u64 seed, unsigned workers = 1) {
  RunOptions opt;
  opt.workers = workers;
  return run_process({kind, n, seed}, opt);
}

}  // namespace

TEST(Coins, DeterministicAndUniform) {
  EXPECT_EQ(coin(7, 6, 1, 1, 2), coin(7, KGeoProgression{6, 1, 1, 2}));
  EXPECT_EQ(coin(7, 6, 1, 1, 2), coin(7, 6, 1, 1, 2));
  u64 total = 0, heads = 0, flips = 0;
  for_each_gp_unordered(6, 2, 100'000, [&](u64 a, u64 b, u64 c) {
    const double u = coin(1, 6, a, b, c);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++total;
    if (u < 0.5) ++heads;
    if ((u < 0.5) != (coin(2, 6, a, b, c) < 0.5)) ++flips;
  });
  ASSERT_GT(total, 1000u);
  const double sigma = std::sqrt(total * 0.25);
  EXPECT_LT(std::abs(static_cast<double>(heads) - total / 2.0), 3 * sigma);
  EXPECT_LT(std::abs(static_cast<double>(flips) - total / 2.0), 3 * sigma);
}

TEST(Process, ConfigValidation) {
  EXPECT_THROW(run_6gp(15, 0), DomainError);
  RunOptions opt;
  opt.max_horizon = 1000;
  EXPECT_THROW(run_6gp(1001, 0, opt), ResourceLimit);
  EXPECT_THROW(parse_kind("7gp"), DomainError);
  for (auto k : kKinds) EXPECT_EQ(parse_kind(to_string(k)), k);
}

TEST(Process, SixGpSmallHorizon) {
  // 4 is only ever the third term of (1, 2, 4, 8, 16, 32); 8 is also the
  // third term of (2, 4, 8, ...).
  for (u64 seed = 0; seed < 20; ++seed) {
    const auto r = run_6gp(16, seed);
    const bool third = coin(seed, 6, 1, 1, 2) < 0.5;
    EXPECT_EQ(r.removed.test(4), third) << seed;
    EXPECT_EQ(r.removed.test(8), !third || coin(seed, 6, 2, 1, 2) < 0.5) << seed;
    for (u64 v : {1, 2, 3, 5, 6, 7}) EXPECT_FALSE(r.removed.test(v)) << v;
  }
}

TEST(Process, ForcedCoinRemovesThirdTerm) {
  const auto zero = [](u64, unsigned, u64, u64, u64) { return 0.0; };
  const auto r = run_process(ProcessConfig{ProcessKind::FiveGP, 5000, 1}, {}, zero);
  std::set<u64> expected;
  for_each_gp_unordered(5, 1, 5000, [&](u64 a, u64 b, u64 c) {
    const u64 t2 = a * b * b * c * c;
    if (t2 <= 5000) expected.insert(t2);
  });
  const auto removed = r.removed.members();
  EXPECT_EQ(std::set<u64>(removed.begin(), removed.end()), expected);
  EXPECT_TRUE(r.removed.test(4));
  EXPECT_FALSE(r.removed.test(2));
}

TEST(Process, WorkerCountDoesNotChangeResult) {
  for (auto kind : kKinds) {
    const auto one = run(kind, 100'000, 11, 1);
    for (unsigned w : {2U, 3U, 8U}) {
      const auto many = run(kind, 100'000, 11, w);
      EXPECT_EQ(one, many) << to_string(kind) << " workers=" << w;
      EXPECT_EQ(io::to_json(one).dump(), io::to_json(many).dump());
    }
  }
}

TEST(Process, LongerHorizonExtendsShorterRun) {
  for (auto kind : kKinds) {
    const auto small = run(kind, 3000, 5);
    const auto big = run(kind, 9000, 5);
    for (u64 v = 1; v <= 3000; ++v) ASSERT_EQ(small.removed.test(v), big.removed.test(v)) << v;
  }
}

TEST(Process, SurvivorsAreFreeAndEveryProgressionIsHit) {
  for (auto kind : kKinds) {
    for (u64 seed : {1, 2, 3}) {
      const auto r = run(kind, 100'000, seed);
      EXPECT_FALSE(verify_free(r).has_value()) << to_string(kind) << " seed " << seed;
      EXPECT_FALSE(hitting_violation(r).has_value()) << to_string(kind) << " seed " << seed;
      EXPECT_GT(r.removed.count(), 0u);
      EXPECT_LT(r.removed.count(), r.config.n);
    }
  }
}

TEST(Process, IntegerRatioSurvivorsKeepRationalTriples) {
  bool found = false;
  for (u64 seed = 0; seed < 5 && !found; ++seed) {
    const auto s = run_3gp_int(10'000, seed).survivors();
    const auto w = contains_gp(s, 3, RatioMode::Rational);
    if (w) {
      EXPECT_GT(w->b, 1u);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Process, VerifyFreeDetectsInjectedProgression) {
  const std::vector<u64> planted{1, 2, 4, 8, 16, 32};
  const auto w = verify_free(planted, ProcessKind::SixGP);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(*w, (KGeoProgression{6, 1, 1, 2}));
  EXPECT_FALSE(verify_free(std::vector<u64>{}, ProcessKind::SixGP).has_value());

  auto r = run_6gp(1000, 4);
  for (u64 v : planted) r.removed.reset(v);
  EXPECT_TRUE(verify_free(r).has_value());
  EXPECT_TRUE(hitting_violation(r).has_value());
}

TEST(Gaps, Examples) {
  const std::vector<u64> s{3, 16, 17, 20};
  const auto rep = gap_report(s, 0.1);
  EXPECT_EQ(rep.gaps, (std::vector<Gap>{{16, 1}, {17, 3}}));
  EXPECT_EQ(rep.max_gap, (Gap{17, 3}));
  const double want = std::max(1.0 / bounds::gap_envelope(16, 0.1, 1),
                               3.0 / bounds::gap_envelope(17, 0.1, 1));
  EXPECT_DOUBLE_EQ(rep.fitted_c_eps, want);
  EXPECT_THROW(gap_report(std::vector<u64>{3, 5, 16}, 0.1), TooFewSurvivors);
  EXPECT_THROW(gap_report(s, 0.0), DomainError);
}

TEST(Gaps, FittedConstantShrinksWithEpsilon) {
  const auto r = run_6gp(200'000, 3);
  double prev = INFINITY;
  for (double eps : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    const auto rep = gap_report(r, eps);
    EXPECT_TRUE(std::isfinite(rep.fitted_c_eps));
    EXPECT_LE(rep.fitted_c_eps, prev);
    prev = rep.fitted_c_eps;
    u64 total = 0;
    for (const auto& g : rep.gaps) total += g.length;
    EXPECT_EQ(total, rep.gaps.back().position + rep.gaps.back().length - rep.gaps.front().position);
  }
}

TEST(Gaps, RegressionAnchor) {
  // Frozen from a verified run; recomputed independently from the saved JSON.
  const auto rep = gap_report(run_6gp(1'000'000, 1), 0.5);
  EXPECT_NEAR(rep.fitted_c_eps, 0.18427078873626643, 1e-12);
  EXPECT_EQ(rep.max_gap, (Gap{121'846, 7}));
}

TEST(Survival, WindowMatchesFullRun) {
  const struct {
    ProcessKind kind;
    u64 x, h;
  } cases[] = {{ProcessKind::SixGP, 200, 10},
               {ProcessKind::SixGP, 4095, 60},
               {ProcessKind::FiveGP, 500, 40},
               {ProcessKind::ThreeGPInt, 500, 40}};
  for (const auto& c : cases) {
    const auto w = build_window(c.kind, c.x, c.h);
    for (u64 t = 0; t < 20; ++t) {
      const u64 s = trial_seed(9, t);
      const auto full = run(c.kind, c.x + c.h, s);
      const auto win = window_removed(w, s);
      for (u64 i = 0; i < c.h; ++i) {
        ASSERT_EQ(win[i] != 0, full.removed.test(c.x + 1 + i))
            << to_string(c.kind) << " x=" << c.x << " element " << c.x + 1 + i;
      }
    }
  }
}

TEST(Survival, DomainChecks) {
  EXPECT_THROW(survival_probability(ProcessKind::SixGP, 10'000, 100, 10, 1), DomainError);
  EXPECT_NO_THROW(survival_probability(ProcessKind::SixGP, 10'000, 99, 10, 1));
  EXPECT_THROW(survival_probability(ProcessKind::SixGP, 15, 1, 10, 1), DomainError);
  EXPECT_THROW(survival_probability(ProcessKind::FiveGP, 100, 0, 10, 1), DomainError);
  EXPECT_THROW(survival_probability(ProcessKind::FiveGP, 100, 5, 0, 1), DomainError);
}

TEST(Survival, PrimeIsNeverRemoved) {
  const auto w = build_window(ProcessKind::SixGP, 16, 1);
  EXPECT_TRUE(w.candidates.empty());
  EXPECT_EQ(survival_probability(ProcessKind::SixGP, 16, 1, 1000, 3).empties, 0u);
}

TEST(Survival, MoreTrialsExtendFewer) {
  const auto w = build_window(ProcessKind::FiveGP, 1000, 3);
  const auto a = survival_outcomes(w, 500, 21);
  const auto b = survival_outcomes(w, 1000, 21);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
}

TEST(Survival, MiddleTermsNeverShareShortWindows) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 60; ++t) {
    const u64 x = std::uniform_int_distribution<u64>(16, 1'000'000)(rng);
    const u64 h = std::uniform_int_distribution<u64>(1, std::max<u64>(1, isqrt(x - 1)))(rng);
    if (h * h >= x) continue;
    ASSERT_TRUE(middle_terms_separated(x, h)) << x << " " << h;
    ASSERT_TRUE(build_window(ProcessKind::SixGP, x, h).middle_terms_separated);
  }
}

TEST(Survival, SingleElementFrequencyMeetsDivisorBound) {
  const u64 trials = 4000;
  for (u64 n = 17; n <= 600; ++n) {
    const auto w = build_window(ProcessKind::SixGP, n - 1, 1);
    const u64 d = oracle::d_ij(n, 3, 2);
    ASSERT_LE(w.candidates.size(), d) << n;
    const auto est = survival_probability(ProcessKind::SixGP, n - 1, 1, trials, n);
    const double survive = 1.0 - est.estimate();
    const double p = std::pow(0.5, static_cast<double>(d));
    const double sigma = std::sqrt(p * (1 - p) / trials);
    ASSERT_GE(survive, p - 3 * sigma - 1e-12) << n;
  }
}

TEST(Serialization, RunRoundTrip) {
  for (auto kind : kKinds) {
    const auto r = run(kind, 5000, 8);
    EXPECT_EQ(io::run_from_json(io::to_json(r)), r);
    std::stringstream bin;
    io::write_bitmap(bin, r.removed);
    EXPECT_EQ(io::read_bitmap(bin, 5000), r.removed);
  }
  EXPECT_THROW(io::run_from_json(nlohmann::json::parse(R"({"config":{"kind":"6gp"}})")),
               DomainError);
  EXPECT_THROW(io::run_from_json(nlohmann::json::parse(
                   R"({"config":{"kind":"6gp","n":20,"seed":0},"removed":[21]})")),
               DomainError);
}
