#pragma once

// Seeded simulation of the randomized GP-removal processes.
//
//   SixGP       every 6-GP loses its third or fourth term, 1/2 each.
//   FiveGP      every 5-GP loses its third term with probability p(t2) and
//               its second term otherwise.
//   ThreeGPInt  every (a, ar, ar^2), r >= 2, loses ar^2 with probability
//               p(ar^2) and ar otherwise.
//
// A run over the horizon N walks exactly the progressions whose smaller
// removable term is <= N; those decide T restricted to [1, N]. Every
// progression draws its own coin by hashing (seed, k, a, b, c), so results do
// not depend on walk order, chunking or worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gpfree/arith.hpp"
#include "gpfree/bitmap.hpp"
#include "gpfree/bounds.hpp"
#include "gpfree/error.hpp"
#include "gpfree/gp_core.hpp"

namespace gpfree::process {

enum class ProcessKind { SixGP, FiveGP, ThreeGPInt };

inline std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::SixGP: return "6gp";
    case ProcessKind::FiveGP: return "5gp";
    case ProcessKind::ThreeGPInt: return "3gp-int";
  }
  return "?";
}

inline ProcessKind parse_kind(const std::string& s) {
  if (s == "6gp") return ProcessKind::SixGP;
  if (s == "5gp") return ProcessKind::FiveGP;
  if (s == "3gp-int") return ProcessKind::ThreeGPInt;
  throw DomainError("unknown process kind '" + s + "' (expected 6gp, 5gp or 3gp-int)");
}

// Length and ratio family of the progressions a kind destroys.
struct TargetFamily {
  unsigned k;
  RatioMode mode;
  unsigned lower_position;  // positions of the two removable terms
  unsigned upper_position;
};

inline TargetFamily target_family(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::SixGP: return {6, RatioMode::Rational, 2, 3};
    case ProcessKind::FiveGP: return {5, RatioMode::Rational, 1, 2};
    case ProcessKind::ThreeGPInt: return {3, RatioMode::Integer, 1, 2};
  }
  return {};
}

struct ProcessConfig {
  ProcessKind kind = ProcessKind::SixGP;
  u64 n = 16;
  u64 seed = 0;

  void validate() const {
    if (n < 16) throw DomainError("process horizon N must be >= 16");
  }
  friend bool operator==(const ProcessConfig&, const ProcessConfig&) = default;
};

struct RunOptions {
  unsigned workers = 1;
  u64 max_horizon = 200'000'000;
  double (*probability)(u64) = &bounds::p_default;
};

struct ProcessRun {
  ProcessConfig config;
  Bitmap removed;          // realized values of U inside [1, N]
  u64 dropped = 0;         // chosen removals that fell beyond N
  u64 progressions = 0;    // progressions walked

  std::vector<u64> survivors() const { return removed.non_members(); }
  friend bool operator==(const ProcessRun&, const ProcessRun&) = default;
};

inline u64 splitmix64(u64 x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform value in [0, 1) determined by (seed, k, a, b, c) alone.
inline double coin(u64 seed, unsigned k, u64 a, u64 b, u64 c) {
  u64 h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ k);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double coin(u64 seed, const KGeoProgression& gp) {
  return coin(seed, gp.k, gp.a, gp.b, gp.c);
}

// Default coin source; tests substitute their own callable.
struct HashedCoin {
  double operator()(u64 seed, unsigned k, u64 a, u64 b, u64 c) const {
    return coin(seed, k, a, b, c);
  }
};

// Seed of Monte Carlo trial t under a base seed.
inline u64 trial_seed(u64 seed, u64 trial) {
  return splitmix64(seed ^ splitmix64(trial + 0x3c6ef372fe94f82bULL));
}

namespace detail {

struct Partial {
  Bitmap removed;
  u64 dropped = 0;
  u64 progressions = 0;
};

template <class Coin>
void walk(const ProcessConfig& cfg, const RunOptions& opt, const Coin& draw, u64 stride,
          u64 offset, Partial& out) {
  const u64 n = cfg.n;
  auto record = [&](u64 value) {
    if (value <= n) {
      out.removed.set(value);
    } else {
      ++out.dropped;
    }
    ++out.progressions;
  };
  switch (cfg.kind) {
    case ProcessKind::SixGP:
      for_each_gp_unordered(
          6, 2, n,
          [&](u64 a, u64 b, u64 c) {
            const u64 t2 = a * b * b * b * c * c;
            const u64 t3 = t2 / b * c;
            record(draw(cfg.seed, 6U, a, b, c) < 0.5 ? t2 : t3);
          },
          stride, offset);
      break;
    case ProcessKind::FiveGP:
      for_each_gp_unordered(
          5, 1, n,
          [&](u64 a, u64 b, u64 c) {
            const u64 t1 = a * b * b * b * c;
            const u64 t2 = t1 / b * c;
            record(draw(cfg.seed, 5U, a, b, c) < opt.probability(t2) ? t2 : t1);
          },
          stride, offset);
      break;
    case ProcessKind::ThreeGPInt:
      for (u64 r = 2; r <= n; ++r) {
        for (u64 a = offset + 1; a <= n / r; a += stride) {
          const u64 t1 = a * r;
          const u64 t2 = t1 * r;
          record(draw(cfg.seed, 3U, a, 1, r) < opt.probability(t2) ? t2 : t1);
        }
      }
      break;
  }
}

}  // namespace detail

template <class Coin = HashedCoin>
ProcessRun run_process(const ProcessConfig& cfg, const RunOptions& opt = {}, Coin draw = {}) {
  cfg.validate();
  if (cfg.n > opt.max_horizon) {
    throw ResourceLimit("process horizon " + std::to_string(cfg.n) + " exceeds budget " +
                        std::to_string(opt.max_horizon));
  }
  const unsigned workers = std::max(1U, opt.workers);
  std::vector<detail::Partial> parts(workers);
  for (auto& p : parts) p.removed = Bitmap(cfg.n);
  if (workers == 1) {
    detail::walk(cfg, opt, draw, 1, 0, parts[0]);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] { detail::walk(cfg, opt, draw, workers, w, parts[w]); });
    }
  }
  ProcessRun run{cfg, std::move(parts[0].removed), parts[0].dropped, parts[0].progressions};
  for (unsigned w = 1; w < workers; ++w) {
    run.removed |= parts[w].removed;
    run.dropped += parts[w].dropped;
    run.progressions += parts[w].progressions;
  }
  return run;
}

inline ProcessRun run_6gp(u64 n, u64 seed, const RunOptions& opt = {}) {
  return run_process({ProcessKind::SixGP, n, seed}, opt);
}
inline ProcessRun run_5gp(u64 n, u64 seed, const RunOptions& opt = {}) {
  return run_process({ProcessKind::FiveGP, n, seed}, opt);
}
inline ProcessRun run_3gp_int(u64 n, u64 seed, const RunOptions& opt = {}) {
  return run_process({ProcessKind::ThreeGPInt, n, seed}, opt);
}

// Some target-family progression lying in [1, N] whose terms are all
// survivors, found by scanning the family directly against `removed`.
inline std::optional<KGeoProgression> hitting_violation(const ProcessRun& run) {
  const auto fam = target_family(run.config.kind);
  const u64 n = run.config.n;
  for (u64 c = 2; sat_pow(c, fam.k - 1) <= n; ++c) {
    const u64 ck = sat_pow(c, fam.k - 1);
    const u64 bmax = fam.mode == RatioMode::Integer ? 1 : c - 1;
    for (u64 b = 1; b <= bmax; ++b) {
      if (std::gcd(b, c) != 1) continue;
      for (u64 a = 1; a <= n / ck; ++a) {
        const KGeoProgression gp{fam.k, a, b, c};
        bool hit = false;
        for (unsigned i = 0; i < fam.k && !hit; ++i) hit = run.removed.test(gp.term(i));
        if (!hit) return gp;
      }
    }
  }
  return std::nullopt;
}

// Witness of a target-family progression among the survivors, if any.
inline std::optional<KGeoProgression> verify_free(std::span<const u64> survivors,
                                                  ProcessKind kind) {
  const auto fam = target_family(kind);
  return contains_gp(survivors, fam.k, fam.mode);
}

inline std::optional<KGeoProgression> verify_free(const ProcessRun& run) {
  const auto s = run.survivors();
  return verify_free(s, run.config.kind);
}

struct Gap {
  u64 position = 0;  // t_i
  u64 length = 0;    // t_{i+1} - t_i
  friend bool operator==(const Gap&, const Gap&) = default;
};

struct GapReport {
  double epsilon = 0;
  std::vector<Gap> gaps;
  Gap max_gap;
  double fitted_c_eps = 0;  // max over gaps of gap / envelope(t_i, eps, 1)
};

// Gaps between consecutive survivors from 16 on, fitted against the
// envelope exp((C_{2,3} + eps) log t / log log t).
inline GapReport gap_report(std::span<const u64> survivors, double epsilon) {
  if (!(epsilon > 0)) throw DomainError("gap_report: epsilon must be positive");
  auto first = std::lower_bound(survivors.begin(), survivors.end(), u64{16});
  if (survivors.end() - first < 2) {
    throw TooFewSurvivors("gap_report: need at least two survivors >= 16");
  }
  GapReport rep;
  rep.epsilon = epsilon;
  for (auto it = first; it + 1 != survivors.end(); ++it) {
    const Gap g{*it, *(it + 1) - *it};
    rep.gaps.push_back(g);
    if (g.length > rep.max_gap.length) rep.max_gap = g;
    const double ratio = static_cast<double>(g.length) /
                         bounds::gap_envelope(static_cast<double>(g.position), epsilon, 1.0);
    rep.fitted_c_eps = std::max(rep.fitted_c_eps, ratio);
  }
  return rep;
}

inline GapReport gap_report(const ProcessRun& run, double epsilon) {
  const auto s = run.survivors();
  return gap_report(s, epsilon);
}

// A progression able to remove a window element, with the rule deciding it.
struct WindowCandidate {
  KGeoProgression gp;
  u64 element = 0;
  double threshold = 0.5;     // removal iff (coin < threshold) == removes_below
  bool removes_below = true;
};

struct Window {
  ProcessKind kind = ProcessKind::SixGP;
  u64 x = 0;
  u64 h = 0;
  std::vector<WindowCandidate> candidates;
  bool middle_terms_separated = true;
};

// For 6-GPs: true when no 6-GP has both of its middle terms in (x, x+h].
inline bool middle_terms_separated(u64 x, u64 h) {
  for (u64 n = x + 1; n <= x + h; ++n) {
    for (const auto& gp : find_gps_with_term_at(n, 6, 2)) {
      const u64 t3 = n / gp.b * gp.c;
      if (t3 > x && t3 <= x + h) return false;
    }
  }
  return true;
}

inline Window build_window(ProcessKind kind, u64 x, u64 h, const RunOptions& opt = {}) {
  if (x < 16) throw DomainError("survival window: x must be >= 16");
  if (h == 0) throw DomainError("survival window: h must be >= 1");
  if (x > opt.max_horizon || h > opt.max_horizon - x) {
    throw ResourceLimit("survival window exceeds horizon budget");
  }
  if (kind == ProcessKind::SixGP && static_cast<u128>(h) * h >= x) {
    throw DomainError("survival window: 6gp mode requires h < sqrt(x)");
  }
  const auto fam = target_family(kind);
  Window w{kind, x, h, {}, true};
  for (u64 n = x + 1; n <= x + h; ++n) {
    for (unsigned pos : {fam.lower_position, fam.upper_position}) {
      for (const auto& gp : find_gps_with_term_at(n, fam.k, pos)) {
        if (fam.mode == RatioMode::Integer && gp.b != 1) continue;
        WindowCandidate cand{gp, n, 0.5, pos == fam.lower_position};
        if (kind != ProcessKind::SixGP) {
          // p is evaluated at the upper removable term.
          const u64 upper = pos == fam.upper_position ? n : n / gp.b * gp.c;
          cand.threshold = opt.probability(upper);
          cand.removes_below = pos == fam.upper_position;
        }
        if (kind == ProcessKind::SixGP && pos == fam.lower_position) {
          const u64 t3 = n / gp.b * gp.c;
          if (t3 > x && t3 <= x + h) w.middle_terms_separated = false;
        }
        w.candidates.push_back(cand);
      }
    }
  }
  return w;
}

// removed[t] tells whether x+1+t is removed by the process run with `seed`.
inline std::vector<char> window_removed(const Window& w, u64 seed) {
  std::vector<char> removed(w.h, 0);
  for (const auto& c : w.candidates) {
    if ((coin(seed, c.gp) < c.threshold) == c.removes_below) removed[c.element - w.x - 1] = 1;
  }
  return removed;
}

// Per trial: true when every element of (x, x+h] was removed.
inline std::vector<bool> survival_outcomes(const Window& w, u64 trials, u64 seed) {
  std::vector<bool> out(trials);
  for (u64 t = 0; t < trials; ++t) {
    const auto removed = window_removed(w, trial_seed(seed, t));
    out[t] = std::all_of(removed.begin(), removed.end(), [](char r) { return r != 0; });
  }
  return out;
}

struct SurvivalEstimate {
  ProcessKind kind = ProcessKind::SixGP;
  u64 x = 0;
  u64 h = 0;
  u64 trials = 0;
  u64 empties = 0;
  bool middle_terms_separated = true;
  u64 seed = 0;

  double estimate() const {
    return trials ? static_cast<double>(empties) / static_cast<double>(trials) : 0.0;
  }
};

// Monte Carlo estimate of P[T misses (x, x+h]]. Trial t uses
// trial_seed(seed, t) and is decided exactly from the progressions through
// the window, which is equivalent to running the process on [1, x+h].
inline SurvivalEstimate survival_probability(ProcessKind kind, u64 x, u64 h, u64 trials,
                                             u64 seed, const RunOptions& opt = {}) {
  if (trials == 0) throw DomainError("survival_probability: trials must be >= 1");
  const Window w = build_window(kind, x, h, opt);
  const auto outcomes = survival_outcomes(w, trials, seed);
  SurvivalEstimate est{kind, x, h, trials, 0, w.middle_terms_separated, seed};
  est.empties = static_cast<u64>(std::count(outcomes.begin(), outcomes.end(), true));
  return est;
}

}  // namespace gpfree::process
