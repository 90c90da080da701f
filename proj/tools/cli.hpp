#pragma once

// gpfree command-line front end. run_cli() is the whole program; main()
// only forwards argv so tests can drive every subcommand in-process.
//
// Exit codes: 0 success, 1 domain error, 2 usage error, 3 resource limit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gpfree/gpfree.hpp"

namespace gpfree::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kWorkersEnv = "GPFREE_WORKERS";

enum ExitCode : int { kOk = 0, kDomain = 1, kUsage = 2, kResource = 3 };

// Budgets and horizons, optionally preset from a key=value file.
struct Settings {
  u64 max_horizon = 200'000'000;
  u64 sieve_max_length = u64{1} << 26;
  u64 sieve_max_prime_bound = 100'000'000;
  u64 mertens_cap = 100'000'000;
  u64 node_budget = 0;
  std::uint64_t enumerate_limit = 100'000;
  unsigned workers = 0;  // 0: not set in the file
};

inline Settings load_settings(const std::string& path) {
  Settings s;
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    u64 v = 0;
    try {
      std::size_t used = 0;
      v = std::stoull(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": bad value '" + val + "'");
    }
    if (key == "max_horizon") s.max_horizon = v;
    else if (key == "sieve_max_length") s.sieve_max_length = v;
    else if (key == "sieve_max_prime_bound") s.sieve_max_prime_bound = v;
    else if (key == "mertens_cap") s.mertens_cap = v;
    else if (key == "node_budget") s.node_budget = v;
    else if (key == "enumerate_limit") s.enumerate_limit = v;
    else if (key == "workers") s.workers = static_cast<unsigned>(v);
    else throw DomainError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return s;
}

// Flag beats environment beats config file beats hardware concurrency.
inline unsigned resolve_workers(unsigned flag, const Settings& s) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const unsigned long v = std::stoul(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  if (s.workers > 0) return s.workers;
  return std::max(1U, std::thread::hardware_concurrency());
}

inline std::vector<u64> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::vector<u64> out;
  std::string tok;
  while (in >> tok) {
    for (char& ch : tok) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream parts(tok);
    std::string p;
    while (parts >> p) {
      try {
        std::size_t used = 0;
        out.push_back(std::stoull(p, &used));
        if (used != p.size()) throw std::invalid_argument(p);
      } catch (const std::exception&) {
        throw DomainError("not a positive integer: '" + p + "'");
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (!out.empty() && out.front() == 0) throw DomainError("set members must be positive");
  return out;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(path + ": " + e.what());
  }
}

class Program {
 public:
  Program(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"gpfree: geometric-progression-free sequences with small gaps"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);
    std::string config_path;
    app.add_option("--config", config_path, "key=value file presetting budgets and horizons")
        ->check(CLI::ExistingFile);
    app.add_option("--format", format_, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    define_gp(app);
    define_divisor(app);
    define_process(app);
    define_syndetic(app);
    define_bounds(app);

    std::vector<const char*> argv{"gpfree"};
    for (const auto& a : args) argv.push_back(a.c_str());
    for (std::size_t i = 0; i < args.size(); ++i) {
      command_ += (i ? " " : "") + args[i];
    }
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out_ << kVersion << "\n";
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n";
      return kUsage;
    }

    try {
      if (!config_path.empty()) settings_ = load_settings(config_path);
      started_ = std::chrono::steady_clock::now();
      return action_();
    } catch (const ResourceLimit& e) {
      err_ << "resource limit: " << e.what() << "\n";
      return kResource;
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << "\n";
      return kUsage;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << "\n";
      return kDomain;
    }
  }

 private:
  struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  bool csv() const { return format_ == "csv"; }

  void emit(const nlohmann::json& payload, std::optional<u64> seed = std::nullopt) {
    const double elapsed = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - started_)
                               .count();
    nlohmann::json env{{"tool_version", kVersion},
                       {"command", command_},
                       {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
                       {"payload", payload},
                       {"elapsed_ms", elapsed}};
    out_ << env.dump(2) << "\n";
  }

  template <class F>
  void on(CLI::App* sub, F&& f) {
    sub->callback([this, f] { action_ = f; });
  }

  // ---- gp -----------------------------------------------------------------
  void define_gp(CLI::App& app) {
    auto* gp = app.add_subcommand("gp", "geometric progressions");
    gp->require_subcommand(1);

    auto* en = gp->add_subcommand("enumerate", "canonical k-GPs bounded at one position");
    en->add_option("--k", k_, "progression length")->required()->check(CLI::Range(3U, 64U));
    en->add_option("--position", position_, "0-based bounded position")->required();
    en->add_option("--bound", bound_, "bound on the term at --position")->required();
    en->add_option("--limit", limit_, "stop after this many progressions");
    on(en, [this] { return gp_enumerate(); });

    auto* de = gp->add_subcommand("decompose", "canonical (a,b,c) of a progression");
    de->add_option("--terms", terms_, "comma-separated terms")->required()->delimiter(',');
    on(de, [this] { return gp_decompose(); });

    auto* co = gp->add_subcommand("contains", "search a set for a k-GP");
    co->add_option("--k", k_, "progression length")->required()->check(CLI::Range(3U, 64U));
    co->add_option("--mode", mode_, "ratio family")
        ->check(CLI::IsMember({"rational", "int"}));
    co->add_option("--input", input_, "whitespace/comma separated integers")
        ->required()
        ->check(CLI::ExistingFile);
    on(co, [this] { return gp_contains(); });
  }

  int gp_enumerate() {
    if (position_ >= k_) throw UsageError("--position must be below --k");
    const std::uint64_t limit = limit_ ? *limit_ : settings_.enumerate_limit;
    nlohmann::json list = nlohmann::json::array();
    bool truncated = false;
    std::ostringstream rows;
    rows << "k,a,b,c,terms\n";
    for_each_gp(k_, position_, bound_, [&](const KGeoProgression& g) {
      if (list.size() >= limit) {
        truncated = true;
        return false;
      }
      auto j = io::to_json(g);
      rows << g.k << "," << g.a << "," << g.b << "," << g.c << ",";
      const auto t = g.terms();
      for (std::size_t i = 0; i < t.size(); ++i) rows << (i ? " " : "") << t[i];
      rows << "\n";
      list.push_back(std::move(j));
      return true;
    });
    if (csv()) {
      out_ << rows.str();
    } else {
      emit({{"k", k_},
            {"position", position_},
            {"bound", bound_},
            {"count", list.size()},
            {"truncated", truncated},
            {"progressions", list}});
    }
    return kOk;
  }

  int gp_decompose() {
    const auto gp = canonicalize(terms_);
    if (csv()) {
      out_ << "k,a,b,c\n" << gp.k << "," << gp.a << "," << gp.b << "," << gp.c << "\n";
    } else {
      emit(io::to_json(gp));
    }
    return kOk;
  }

  int gp_contains() {
    const auto set = read_numbers(input_);
    const RatioMode mode = mode_ == "int" ? RatioMode::Integer : RatioMode::Rational;
    const auto w = contains_gp(set, k_, mode);
    if (csv()) {
      out_ << "found,terms\n" << (w ? "true" : "false") << ",";
      if (w) {
        const auto t = w->terms();
        for (std::size_t i = 0; i < t.size(); ++i) out_ << (i ? " " : "") << t[i];
      }
      out_ << "\n";
    } else {
      emit({{"k", k_},
            {"mode", mode_},
            {"set_size", set.size()},
            {"found", w.has_value()},
            {"witness", w ? io::to_json(*w) : nlohmann::json(nullptr)}});
    }
    return kOk;
  }

  // ---- divisor ------------------------------------------------------------
  void define_divisor(CLI::App& app) {
    auto* dv = app.add_subcommand("divisor", "divisor-counting functions");
    dv->require_subcommand(1);

    auto add_interval = [this](CLI::App* s) {
      s->add_option("--start", start_, "interval (start, start+len]")->required();
      s->add_option("--len", len_, "interval length")->required()->check(CLI::PositiveNumber);
    };
    auto* tb = dv->add_subcommand("table", "d_k or d_{i,j} over an interval");
    tb->add_option("--i", i_, "first exponent (or k alone for d_k)")
        ->required()
        ->check(CLI::PositiveNumber);
    tb->add_option("--j", j_, "second exponent; omit for d_k")->check(CLI::PositiveNumber);
    add_interval(tb);
    on(tb, [this] { return divisor_table(); });

    auto* sm = dv->add_subcommand("sum", "S_{i,j}(x,h,D)");
    sm->add_option("--i", i_, "first exponent")->required()->check(CLI::PositiveNumber);
    sm->add_option("--j", j_, "second exponent")->required()->check(CLI::PositiveNumber);
    add_interval(sm);
    sm->add_option("--D", d_weight_, "weight D > 0")->required()->check(CLI::PositiveNumber);
    on(sm, [this] { return divisor_sum(); });

    auto* me = dv->add_subcommand("mertens", "sum of 1/p over primes p <= x");
    me->add_option("--x", x_, "upper limit (>= 3)")->required();
    on(me, [this] { return divisor_mertens(); });
  }

  SieveLimits sieve_limits() const {
    return {settings_.sieve_max_length, settings_.sieve_max_prime_bound};
  }

  int divisor_table() {
    const DivisorSpec spec = j_ ? DivisorSpec::pair(i_, *j_) : DivisorSpec::single(i_);
    const auto table = sieve({start_, len_}, spec, sieve_limits());
    if (csv()) {
      out_ << io::to_csv(table);
    } else {
      emit(io::to_json(table));
    }
    return kOk;
  }

  int divisor_sum() {
    const DivisorSpec spec = DivisorSpec::pair(i_, *j_);
    const auto table = sieve({start_, len_}, spec, sieve_limits());
    const long double s = weighted_sum(table, d_weight_);
    const long double jb = jensen_bound(table, d_weight_);
    nlohmann::json p{{"i", i_},
                     {"j", *j_},
                     {"start", start_},
                     {"len", len_},
                     {"D", static_cast<double>(d_weight_)},
                     {"S", static_cast<double>(s)},
                     {"jensen_lower_bound", static_cast<double>(jb)},
                     {"divisor_sum", table.sum()}};
    if (csv()) {
      out_ << "i,j,start,len,D,S,jensen_lower_bound\n"
           << i_ << "," << *j_ << "," << start_ << "," << len_ << "," << p["D"].dump() << ","
           << p["S"].dump() << "," << p["jensen_lower_bound"].dump() << "\n";
    } else {
      emit(p);
    }
    return kOk;
  }

  int divisor_mertens() {
    const long double s = mertens_sum(x_, settings_.mertens_cap);
    emit({{"x", x_}, {"sum", static_cast<double>(s)}});
    return kOk;
  }

  // ---- process ------------------------------------------------------------
  void define_process(CLI::App& app) {
    auto* pr = app.add_subcommand("process", "randomized GP-removal processes");
    pr->require_subcommand(1);

    auto* run = pr->add_subcommand("run", "simulate one process on [1,N]");
    run->add_option("--kind", kind_, "6gp|5gp|3gp-int")
        ->required()
        ->check(CLI::IsMember({"6gp", "5gp", "3gp-int"}));
    run->add_option("--n", n_, "horizon N (>= 16)")->required();
    run->add_option("--seed", seed_, "64-bit seed")->required();
    run->add_option("--out", out_path_, "write the run JSON here");
    run->add_option("--bitmap", bitmap_path_, "also write the removed set as a binary bitmap");
    run->add_option("--workers", workers_, "worker threads");
    on(run, [this] { return process_run(); });

    auto* gaps = pr->add_subcommand("gaps", "gap report of a saved run");
    gaps->add_option("--in", in_path_, "run JSON")->required()->check(CLI::ExistingFile);
    gaps->add_option("--epsilon", epsilon_, "envelope epsilon")
        ->required()
        ->check(CLI::PositiveNumber);
    gaps->add_flag("--with-gaps", with_gaps_, "list every gap in the JSON payload");
    on(gaps, [this] { return process_gaps(); });

    auto* sv = pr->add_subcommand("survival", "Monte Carlo P[T misses (x, x+h]]");
    sv->add_option("--kind", kind_, "6gp|5gp|3gp-int")
        ->required()
        ->check(CLI::IsMember({"6gp", "5gp", "3gp-int"}));
    sv->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
    sv->add_option("--x", x_, "window start")->required();
    sv->add_option("--h", h_, "window length")->required()->check(CLI::PositiveNumber);
    sv->add_option("--trials", trials_, "trial count")->required()->check(CLI::PositiveNumber);
    sv->add_option("--seed", seed_, "64-bit seed")->required();
    on(sv, [this] { return process_survival(); });

    auto* vf = pr->add_subcommand("verify", "check a saved run is GP-free");
    vf->add_option("--in", in_path_, "run JSON")->required()->check(CLI::ExistingFile);
    on(vf, [this] { return process_verify(); });
  }

  process::RunOptions run_options() const {
    process::RunOptions opt;
    opt.workers = resolve_workers(workers_, settings_);
    opt.max_horizon = settings_.max_horizon;
    return opt;
  }

  int process_run() {
    const process::ProcessConfig cfg{process::parse_kind(kind_), n_, seed_};
    const auto run = process::run_process(cfg, run_options());
    const auto j = io::to_json(run);
    if (!bitmap_path_.empty()) {
      std::ofstream bm(bitmap_path_, std::ios::binary);
      if (!bm) throw DomainError("cannot write " + bitmap_path_);
      io::write_bitmap(bm, run.removed);
    }
    if (!out_path_.empty()) {
      std::ofstream f(out_path_);
      if (!f) throw DomainError("cannot write " + out_path_);
      f << j.dump() << "\n";
      emit({{"config", j["config"]}, {"counts", j["counts"]}, {"out", out_path_}}, seed_);
    } else {
      emit(j, seed_);
    }
    return kOk;
  }

  int process_gaps() {
    const auto run = io::run_from_json(read_json_file(in_path_));
    const auto rep = process::gap_report(run, epsilon_);
    if (csv()) {
      out_ << io::to_csv(rep);
    } else {
      auto p = io::to_json(rep, with_gaps_);
      p["config"] = {{"kind", process::to_string(run.config.kind)},
                     {"n", run.config.n},
                     {"seed", run.config.seed}};
      emit(p, run.config.seed);
    }
    return kOk;
  }

  int process_survival() {
    const auto est = process::survival_probability(process::parse_kind(kind_), x_, h_, trials_,
                                                   seed_, run_options());
    if (csv()) {
      out_ << io::to_csv(est);
    } else {
      auto p = io::to_json(est);
      if (est.x >= 16) {
        p["envelope_exponent"] = std::log(static_cast<double>(est.x)) /
                                 std::log(std::log(static_cast<double>(est.x)));
      }
      emit(p, seed_);
    }
    return kOk;
  }

  int process_verify() {
    const auto run = io::run_from_json(read_json_file(in_path_));
    const auto w = process::verify_free(run);
    emit({{"kind", process::to_string(run.config.kind)},
          {"n", run.config.n},
          {"free", !w.has_value()},
          {"witness", w ? io::to_json(*w) : nlohmann::json(nullptr)}},
         run.config.seed);
    return kOk;
  }

  // ---- syndetic -----------------------------------------------------------
  void define_syndetic(CLI::App& app) {
    auto* sy = app.add_subcommand("syndetic", "exhaustive 3-GP search over pair selections");
    sy->require_subcommand(1);

    auto* se = sy->add_subcommand("search", "search for a 3-GP-free selection");
    se->add_option("--n", sn_, "N (even for disjoint pairing)")->required();
    se->add_option("--pairing", pairing_, "overlapping {i,i+1} or disjoint {2i-1,2i}")
        ->check(CLI::IsMember({"disjoint", "overlapping"}));
    se->add_option("--workers", workers_, "worker threads");
    se->add_option("--budget", budget_, "node budget (0 = unlimited)");
    se->add_option("--order", order_, "branch order")
        ->check(CLI::IsMember({"ascending", "most-constrained"}));
    se->add_flag("--no-propagation", no_propagation_, "disable unit propagation");
    on(se, [this] { return syndetic_search(); });

    auto* ex = sy->add_subcommand("export", "write the instance as CNF");
    ex->add_option("--n", sn_, "N")->required();
    ex->add_option("--pairing", pairing_, "overlapping or disjoint")
        ->check(CLI::IsMember({"disjoint", "overlapping"}));
    ex->add_option("--format", export_format_, "export format")
        ->check(CLI::IsMember({"dimacs"}));
    on(ex, [this] { return syndetic_export(); });
  }

  syndetic::Pairing pairing() const {
    return pairing_ == "disjoint" ? syndetic::Pairing::Disjoint : syndetic::Pairing::Overlapping;
  }

  int syndetic_search() {
    const auto inst = syndetic::build_instance(sn_, pairing());
    syndetic::SearchConfig cfg;
    cfg.order = order_ == "most-constrained" ? syndetic::BranchOrder::MostConstrainedFirst
                                             : syndetic::BranchOrder::AscendingPairs;
    cfg.propagation = !no_propagation_;
    cfg.workers = resolve_workers(workers_, settings_);
    cfg.node_budget = budget_ ? *budget_ : settings_.node_budget;
    const auto outcome = syndetic::search(inst, cfg);
    emit(io::to_json(inst, outcome));
    if (outcome.verdict == syndetic::Verdict::BudgetExhausted) {
      err_ << "resource limit: node budget " << cfg.node_budget << " exhausted\n";
      return kResource;
    }
    return kOk;
  }

  int syndetic_export() {
    out_ << syndetic::to_dimacs(syndetic::build_instance(sn_, pairing()));
    return kOk;
  }

  // ---- bounds -------------------------------------------------------------
  void define_bounds(CLI::App& app) {
    auto* bd = app.add_subcommand("bounds", "closed-form envelopes");
    bd->require_subcommand(1);
    auto* en = bd->add_subcommand("envelope", "C_eps exp((C_{2,3}+eps) log x/log log x) on a grid");
    en->add_option("--epsilon", epsilon_, "epsilon > 0")->required()->check(CLI::PositiveNumber);
    en->add_option("--c-eps", c_eps_, "C_eps > 0")->required()->check(CLI::PositiveNumber);
    en->add_option("--from", from_, "first grid point")->required();
    en->add_option("--to", to_, "last grid point")->required();
    en->add_option("--points", points_, "grid size (>= 1)")->required();
    en->add_flag("--log", log_grid_, "geometric instead of linear spacing");
    on(en, [this] { return bounds_envelope(); });
  }

  int bounds_envelope() {
    if (points_ < 1) throw UsageError("--points must be >= 1");
    if (to_ < from_) throw UsageError("--to must be >= --from");
    if (log_grid_ && !(from_ > 0)) throw UsageError("--log needs --from > 0");
    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream csv_rows;
    csv_rows << "x,value\n";
    for (std::uint64_t p = 0; p < points_; ++p) {
      double x = from_;
      if (points_ > 1) {
        const double t = static_cast<double>(p) / static_cast<double>(points_ - 1);
        x = log_grid_ ? from_ * std::pow(to_ / from_, t) : from_ + (to_ - from_) * t;
      }
      const double v = bounds::gap_envelope(x, epsilon_, c_eps_);
      rows.push_back({{"x", x}, {"value", v}});
      csv_rows << nlohmann::json(x).dump() << "," << nlohmann::json(v).dump() << "\n";
    }
    if (csv()) {
      out_ << csv_rows.str();
    } else {
      emit({{"C_2_3", bounds::c_ij(2, 3)},
            {"C_2_3_coefficient", "5/6"},
            {"epsilon", epsilon_},
            {"c_eps", c_eps_},
            {"rows", rows}});
    }
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  Settings settings_;
  std::string format_ = "json";
  std::string command_;
  std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
  std::function<int()> action_;

  // option storage
  unsigned k_ = 3, position_ = 0;
  u64 bound_ = 0;
  std::optional<std::uint64_t> limit_;
  std::vector<u64> terms_;
  std::string mode_ = "rational", input_;
  unsigned i_ = 1;
  std::optional<unsigned> j_;
  u64 start_ = 0, len_ = 1, x_ = 0, h_ = 1, trials_ = 1, n_ = 0, seed_ = 0;
  double d_weight_ = 1;
  std::string kind_, out_path_, bitmap_path_, in_path_;
  unsigned workers_ = 0;
  double epsilon_ = 0, c_eps_ = 1, from_ = 0, to_ = 0;
  std::uint64_t points_ = 0;
  bool with_gaps_ = false, log_grid_ = false, no_propagation_ = false;
  std::uint32_t sn_ = 0;
  std::string pairing_ = "overlapping", order_ = "ascending", export_format_ = "dimacs";
  std::optional<u64> budget_;
};

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Program p(out, err);
  return p.run(args);
}

}  // namespace gpfree::cli
