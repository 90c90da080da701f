#pragma once

// Exhaustive search for a 3-GP-free selection that takes (at least) one
// integer from every pair of consecutive integers in [1, N].
//
// Selections are assignments over the elements of [1, N]: each element is
// undecided, chosen or excluded. Pair constraints say a pair may not be fully
// excluded; triple constraints say a 3-GP (y^2 = xz) may not be fully chosen.
// Under disjoint pairing a chosen element excludes its partner: adding
// elements never removes a 3-GP, so exactly-one selections are exhaustive.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gpfree/error.hpp"
#include "gpfree/gp_core.hpp"

namespace gpfree::syndetic {

enum class Pairing { Disjoint, Overlapping };

inline std::string to_string(Pairing p) {
  return p == Pairing::Disjoint ? "disjoint" : "overlapping";
}

struct SearchInstance {
  std::uint32_t n = 0;
  Pairing pairing = Pairing::Overlapping;
  std::vector<std::array<std::uint32_t, 2>> pairs;
  std::vector<GPTriple> triples;
  // Indexed by element 1..n (slot 0 unused).
  std::vector<std::vector<std::uint32_t>> element_triples;
  std::vector<std::vector<std::uint32_t>> element_pairs;
};

inline SearchInstance build_instance(std::uint32_t n, Pairing pairing = Pairing::Overlapping) {
  if (n < 4) throw DomainError("build_instance: N must be >= 4");
  if (pairing == Pairing::Disjoint && n % 2 != 0) {
    throw DomainError("build_instance: disjoint pairing needs an even N");
  }
  SearchInstance inst;
  inst.n = n;
  inst.pairing = pairing;
  if (pairing == Pairing::Disjoint) {
    for (std::uint32_t i = 1; i < n; i += 2) inst.pairs.push_back({i, i + 1});
  } else {
    for (std::uint32_t i = 1; i < n; ++i) inst.pairs.push_back({i, i + 1});
  }
  inst.triples = enumerate_3gp_triples(n);
  inst.element_triples.resize(n + 1);
  inst.element_pairs.resize(n + 1);
  for (std::uint32_t t = 0; t < inst.triples.size(); ++t) {
    const auto& tr = inst.triples[t];
    for (u64 e : {tr.x, tr.y, tr.z}) inst.element_triples[e].push_back(t);
  }
  for (std::uint32_t p = 0; p < inst.pairs.size(); ++p) {
    for (auto e : inst.pairs[p]) inst.element_pairs[e].push_back(p);
  }
  return inst;
}

// The lexicographically first triple fully inside the selection, or nullopt.
// Throws MalformedSelection unless every pair has a selected member.
inline std::optional<GPTriple> verify_selection(const SearchInstance& inst,
                                                std::span<const std::uint32_t> selection) {
  std::vector<char> in(inst.n + 1, 0);
  for (auto e : selection) {
    if (e == 0 || e > inst.n) {
      throw MalformedSelection("selection element " + std::to_string(e) + " outside [1,N]");
    }
    in[e] = 1;
  }
  for (const auto& [u, v] : inst.pairs) {
    if (!in[u] && !in[v]) {
      throw MalformedSelection("pair {" + std::to_string(u) + "," + std::to_string(v) +
                               "} has no selected element");
    }
  }
  for (std::uint32_t e = 1; e <= inst.n; ++e) {
    if (!in[e]) continue;
    for (auto t : inst.element_triples[e]) {
      const auto& tr = inst.triples[t];
      if (tr.x == e && in[tr.y] && in[tr.z]) return tr;
    }
  }
  return std::nullopt;
}

// One clause per pair (x1 v x2) and one per triple (-y1 v -y2 v -y3).
inline std::string to_dimacs(const SearchInstance& inst) {
  std::ostringstream os;
  os << "c 3-GP-free selections from pairs of consecutive integers, N=" << inst.n
     << ", pairing=" << to_string(inst.pairing) << "\n";
  os << "p cnf " << inst.n << " " << inst.pairs.size() + inst.triples.size() << "\n";
  for (const auto& [u, v] : inst.pairs) os << u << " " << v << " 0\n";
  for (const auto& t : inst.triples) os << "-" << t.x << " -" << t.y << " -" << t.z << " 0\n";
  return os.str();
}

enum class BranchOrder { AscendingPairs, MostConstrainedFirst };

struct SearchConfig {
  BranchOrder order = BranchOrder::AscendingPairs;
  bool propagation = true;
  unsigned workers = 1;
  std::uint64_t node_budget = 0;  // 0 = unlimited
};

struct SearchStats {
  std::uint64_t nodes = 0;
  std::uint64_t triple_prunings = 0;
  std::uint64_t pair_prunings = 0;
  std::uint64_t forced = 0;
  std::uint64_t subtrees = 0;
  double elapsed_ms = 0;
};

enum class Verdict { Exhausted, Counterexample, BudgetExhausted };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Exhausted: return "Exhausted";
    case Verdict::Counterexample: return "Counterexample";
    case Verdict::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

struct SearchOutcome {
  Verdict verdict = Verdict::Exhausted;
  SearchStats stats;
  std::vector<std::uint32_t> selection;  // set for Counterexample
};

namespace detail {

enum : std::uint8_t { kUndecided = 0, kChosen = 1, kExcluded = 2 };

struct SharedControl {
  std::atomic<std::uint64_t> nodes{0};
  std::atomic<std::uint64_t> best_task{std::numeric_limits<std::uint64_t>::max()};
  std::atomic<bool> out_of_budget{false};
  std::uint64_t budget = 0;
};

class Engine {
 public:
  Engine(const SearchInstance& inst, const SearchConfig& cfg, SharedControl& ctl)
      : inst_(inst),
        cfg_(cfg),
        ctl_(ctl),
        state_(inst.n + 1, kUndecided),
        chosen_in_triple_(inst.triples.size(), 0),
        excluded_in_triple_(inst.triples.size(), 0) {
    trail_.reserve(inst.n + 1);
    queue_.reserve(inst.n + 1);
  }

  // Runs subtree `task` of 2^depth: the first `depth` branching decisions
  // follow the bits of `task`, most significant first.
  bool run_task(std::uint64_t task, unsigned depth) {
    task_ = task;
    depth_ = depth;
    return dfs(0);
  }

  const SearchStats& stats() const { return stats_; }
  std::vector<std::uint32_t> selection() const {
    std::vector<std::uint32_t> sel;
    for (std::uint32_t e = 1; e <= inst_.n; ++e) {
      if (state_[e] == kChosen) sel.push_back(e);
    }
    return sel;
  }
  bool aborted() const { return aborted_; }

 private:
  struct Decision {
    // Elements to choose/exclude for option 0 and option 1.
    std::array<std::uint32_t, 2> choose{};
    std::array<std::uint32_t, 2> exclude{};
  };

  bool dfs(unsigned level) {
    if (should_stop()) return false;
    ++stats_.nodes;
    if (ctl_.budget && ctl_.nodes.fetch_add(1, std::memory_order_relaxed) + 1 > ctl_.budget) {
      ctl_.out_of_budget = true;
      aborted_ = true;
      return false;
    }
    auto decision = next_decision();
    if (!decision) {
      // Every element decided without conflict. A completed assignment above
      // the split depth would be revisited by the sibling tasks, so only the
      // all-zero continuation reports it.
      if (level < depth_ && (task_ & ((std::uint64_t{1} << (depth_ - level)) - 1)) != 0) {
        return false;
      }
      return true;
    }
    for (unsigned option = 0; option < 2; ++option) {
      if (level < depth_) {
        const unsigned bit = (task_ >> (depth_ - 1 - level)) & 1U;
        if (bit != option) continue;
      }
      const std::size_t mark = trail_.size();
      bool ok = true;
      if (decision->choose[option]) ok = assign(decision->choose[option], kChosen);
      if (ok && decision->exclude[option]) ok = assign(decision->exclude[option], kExcluded);
      if (ok) ok = propagate();
      if (ok && dfs(level + 1)) return true;
      undo(mark);
      if (aborted_) return false;
    }
    return false;
  }

  bool should_stop() {
    if (ctl_.out_of_budget.load(std::memory_order_relaxed) ||
        ctl_.best_task.load(std::memory_order_relaxed) < task_) {
      aborted_ = true;
    }
    return aborted_;
  }

  std::optional<Decision> next_decision() {
    if (inst_.pairing == Pairing::Disjoint) {
      std::optional<std::uint32_t> pick;
      long best_score = -1;
      for (std::uint32_t p = 0; p < inst_.pairs.size(); ++p) {
        const auto [u, v] = inst_.pairs[p];
        if (state_[u] != kUndecided || state_[v] != kUndecided) continue;
        if (cfg_.order == BranchOrder::AscendingPairs) {
          pick = p;
          break;
        }
        const long score = pressure(u) + pressure(v);
        if (score > best_score) {
          best_score = score;
          pick = p;
        }
      }
      if (!pick) return std::nullopt;
      const auto [u, v] = inst_.pairs[*pick];
      return Decision{{u, v}, {v, u}};
    }
    // Overlapping: branch on single elements, excluding first.
    std::optional<std::uint32_t> pick;
    long best_score = -1;
    for (std::uint32_t e = 1; e <= inst_.n; ++e) {
      if (state_[e] != kUndecided) continue;
      if (cfg_.order == BranchOrder::AscendingPairs) {
        pick = e;
        break;
      }
      const long score = pressure(e);
      if (score > best_score) {
        best_score = score;
        pick = e;
      }
    }
    if (!pick) return std::nullopt;
    return Decision{{0, *pick}, {*pick, 0}};
  }

  // Chosen members across the live triples of e.
  long pressure(std::uint32_t e) const {
    long s = 0;
    for (auto t : inst_.element_triples[e]) {
      if (excluded_in_triple_[t] == 0) s += 1 + 4 * chosen_in_triple_[t];
    }
    return s;
  }

  bool assign(std::uint32_t e, std::uint8_t value) {
    if (state_[e] == value) return true;
    if (state_[e] != kUndecided) {
      ++(value == kChosen ? stats_.pair_prunings : stats_.triple_prunings);
      return false;
    }
    state_[e] = value;
    trail_.push_back(e);
    bool ok = true;
    if (value == kChosen) {
      for (auto t : inst_.element_triples[e]) {
        if (++chosen_in_triple_[t] == 3) ok = false;
      }
      if (!ok) {
        ++stats_.triple_prunings;
        return false;
      }
      queue_.push_back(e);
    } else {
      for (auto t : inst_.element_triples[e]) ++excluded_in_triple_[t];
      for (auto p : inst_.element_pairs[e]) {
        const auto& pr = inst_.pairs[p];
        const std::uint32_t other = pr[0] == e ? pr[1] : pr[0];
        if (state_[other] == kExcluded) {
          ++stats_.pair_prunings;
          return false;
        }
      }
      queue_.push_back(e);
    }
    return true;
  }

  // Unit propagation to a fixpoint over the queued assignments.
  bool propagate() {
    bool ok = true;
    std::size_t head = 0;
    while (ok && head < queue_.size()) {
      const std::uint32_t e = queue_[head++];
      if (!cfg_.propagation) continue;
      if (state_[e] == kChosen) {
        if (inst_.pairing == Pairing::Disjoint) {
          for (auto p : inst_.element_pairs[e]) {
            const auto& pr = inst_.pairs[p];
            const std::uint32_t other = pr[0] == e ? pr[1] : pr[0];
            if (state_[other] == kUndecided) {
              ++stats_.forced;
              if (!(ok = assign(other, kExcluded))) break;
            }
          }
        }
        for (auto t : inst_.element_triples[e]) {
          if (!ok || chosen_in_triple_[t] != 2) continue;
          const auto& tr = inst_.triples[t];
          for (u64 m : {tr.x, tr.y, tr.z}) {
            const auto u = static_cast<std::uint32_t>(m);
            if (state_[u] == kUndecided) {
              ++stats_.forced;
              if (!(ok = assign(u, kExcluded))) break;
            }
          }
        }
      } else {
        for (auto p : inst_.element_pairs[e]) {
          const auto& pr = inst_.pairs[p];
          const std::uint32_t other = pr[0] == e ? pr[1] : pr[0];
          if (state_[other] == kUndecided) {
            ++stats_.forced;
            if (!(ok = assign(other, kChosen))) break;
          }
        }
      }
    }
    queue_.clear();
    return ok;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      const std::uint32_t e = trail_.back();
      trail_.pop_back();
      if (state_[e] == kChosen) {
        for (auto t : inst_.element_triples[e]) --chosen_in_triple_[t];
      } else {
        for (auto t : inst_.element_triples[e]) --excluded_in_triple_[t];
      }
      state_[e] = kUndecided;
    }
    queue_.clear();
  }

  const SearchInstance& inst_;
  const SearchConfig& cfg_;
  SharedControl& ctl_;
  std::vector<std::uint8_t> state_;
  std::vector<std::uint8_t> chosen_in_triple_;
  std::vector<std::uint8_t> excluded_in_triple_;
  std::vector<std::uint32_t> trail_;
  std::vector<std::uint32_t> queue_;
  SearchStats stats_;
  std::uint64_t task_ = 0;
  unsigned depth_ = 0;
  bool aborted_ = false;
};

}  // namespace detail

// Number of leading branching decisions split into independent subtrees.
inline unsigned split_depth(unsigned workers) {
  const unsigned w = std::max(1U, workers);
  return static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(w)))) + 3;
}

inline SearchOutcome search(const SearchInstance& inst, const SearchConfig& cfg = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const unsigned depth = split_depth(cfg.workers);
  const std::uint64_t tasks = std::uint64_t{1} << depth;

  detail::SharedControl ctl;
  ctl.budget = cfg.node_budget;
  std::atomic<std::uint64_t> next_task{0};
  std::mutex mu;
  SearchOutcome outcome;
  std::optional<std::uint64_t> found_task;

  auto worker = [&] {
    SearchStats local;
    for (;;) {
      const std::uint64_t task = next_task.fetch_add(1);
      if (task >= tasks || ctl.out_of_budget) break;
      if (ctl.best_task.load() < task) continue;
      detail::Engine engine(inst, cfg, ctl);
      const bool found = engine.run_task(task, depth);
      const auto& s = engine.stats();
      local.nodes += s.nodes;
      local.triple_prunings += s.triple_prunings;
      local.pair_prunings += s.pair_prunings;
      local.forced += s.forced;
      ++local.subtrees;
      if (found) {
        std::lock_guard lock(mu);
        if (!found_task || task < *found_task) {
          found_task = task;
          outcome.selection = engine.selection();
          std::uint64_t cur = ctl.best_task.load();
          while (task < cur && !ctl.best_task.compare_exchange_weak(cur, task)) {
          }
        }
      }
    }
    std::lock_guard lock(mu);
    outcome.stats.nodes += local.nodes;
    outcome.stats.triple_prunings += local.triple_prunings;
    outcome.stats.pair_prunings += local.pair_prunings;
    outcome.stats.forced += local.forced;
    outcome.stats.subtrees += local.subtrees;
  };

  const unsigned workers = std::max(1U, cfg.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  if (found_task) {
    outcome.verdict = Verdict::Counterexample;
    if (auto bad = verify_selection(inst, outcome.selection)) {
      throw std::logic_error("search produced a selection containing a 3-GP");
    }
  } else if (ctl.out_of_budget) {
    outcome.verdict = Verdict::BudgetExhausted;
  } else {
    outcome.verdict = Verdict::Exhausted;
  }
  outcome.stats.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return outcome;
}

}  // namespace gpfree::syndetic
