#pragma once

// JSON, CSV and binary encodings of the library's records.

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpfree/divisor.hpp"
#include "gpfree/error.hpp"
#include "gpfree/gp_core.hpp"
#include "gpfree/process.hpp"
#include "gpfree/syndetic.hpp"

namespace gpfree::io {

using nlohmann::json;

inline json to_json(const KGeoProgression& gp) {
  json j{{"k", gp.k}, {"a", gp.a}, {"b", gp.b}, {"c", gp.c}};
  try {
    j["terms"] = gp.terms();
  } catch (const DomainError&) {
    j["terms"] = nullptr;  // beyond 64 bits
  }
  return j;
}

inline json to_json(const GPTriple& t) { return json::array({t.x, t.y, t.z}); }

inline json to_json(const DivisorTable& table) {
  return {{"interval", {{"start", table.interval.start}, {"length", table.interval.length}}},
          {"spec", table.spec.name()},
          {"values", table.values}};
}

inline std::string to_csv(const DivisorTable& table) {
  std::ostringstream os;
  os << "n,value\n";
  for (std::size_t t = 0; t < table.values.size(); ++t) {
    os << table.interval.first() + t << "," << table.values[t] << "\n";
  }
  return os.str();
}

// {config, counts, removed: sorted list}
inline json to_json(const process::ProcessRun& run) {
  const u64 removed = run.removed.count();
  return {{"config",
           {{"kind", process::to_string(run.config.kind)},
            {"n", run.config.n},
            {"seed", run.config.seed}}},
          {"counts",
           {{"removed", removed},
            {"survivors", run.config.n - removed},
            {"dropped_beyond_n", run.dropped},
            {"progressions", run.progressions}}},
          {"removed", run.removed.members()}};
}

inline process::ProcessRun run_from_json(const json& j) {
  try {
    process::ProcessRun run;
    run.config.kind = process::parse_kind(j.at("config").at("kind").get<std::string>());
    run.config.n = j.at("config").at("n").get<u64>();
    run.config.seed = j.at("config").at("seed").get<u64>();
    run.config.validate();
    run.removed = Bitmap(run.config.n);
    for (u64 v : j.at("removed").get<std::vector<u64>>()) {
      if (v == 0 || v > run.config.n) throw DomainError("removed value outside [1,N]");
      run.removed.set(v);
    }
    if (j.contains("counts")) {
      run.dropped = j["counts"].value("dropped_beyond_n", u64{0});
      run.progressions = j["counts"].value("progressions", u64{0});
    }
    return run;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed process run JSON: ") + e.what());
  }
}

// Little-endian 64-bit words; bit t of the stream stands for integer t+1.
inline void write_bitmap(std::ostream& os, const Bitmap& bm) {
  for (std::uint64_t w : bm.words()) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(w >> (8 * i));
    os.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

inline Bitmap read_bitmap(std::istream& is, std::uint64_t n) {
  std::vector<std::uint64_t> words((n + 63) / 64, 0);
  for (auto& w : words) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw DomainError("bitmap stream too short");
    for (int i = 0; i < 8; ++i) w |= std::uint64_t{bytes[i]} << (8 * i);
  }
  return Bitmap::from_words(n, std::move(words));
}

inline json to_json(const process::GapReport& rep, bool include_gaps = true) {
  json j{{"epsilon", rep.epsilon},
         {"gap_count", rep.gaps.size()},
         {"max_gap", rep.max_gap.length},
         {"max_gap_at", rep.max_gap.position},
         {"fitted_C_eps", rep.fitted_c_eps}};
  if (include_gaps) {
    json gaps = json::array();
    for (const auto& g : rep.gaps) gaps.push_back({g.position, g.length});
    j["gaps"] = std::move(gaps);
  }
  return j;
}

inline std::string to_csv(const process::GapReport& rep) {
  std::ostringstream os;
  os << "position,gap\n";
  for (const auto& g : rep.gaps) os << g.position << "," << g.length << "\n";
  return os.str();
}

inline json to_json(const process::SurvivalEstimate& est) {
  return {{"kind", process::to_string(est.kind)},
          {"x", est.x},
          {"h", est.h},
          {"trials", est.trials},
          {"empties", est.empties},
          {"estimate", est.estimate()},
          {"middle_terms_separated", est.middle_terms_separated},
          {"seed", est.seed}};
}

inline std::string to_csv(const process::SurvivalEstimate& est) {
  std::ostringstream os;
  os << "kind,x,h,trials,empties,estimate\n"
     << process::to_string(est.kind) << "," << est.x << "," << est.h << "," << est.trials << ","
     << est.empties << "," << est.estimate() << "\n";
  return os.str();
}

// Search statistics are kept apart from the verdict so callers can compare
// payloads that must not depend on timing.
inline json to_json(const syndetic::SearchInstance& inst, const syndetic::SearchOutcome& out) {
  json j{{"N", inst.n},
         {"pairing", syndetic::to_string(inst.pairing)},
         {"triples", inst.triples.size()},
         {"verdict", syndetic::to_string(out.verdict)},
         {"nodes", out.stats.nodes},
         {"prunings", {{"triple", out.stats.triple_prunings}, {"pair", out.stats.pair_prunings}}},
         {"forced", out.stats.forced},
         {"subtrees", out.stats.subtrees},
         {"elapsed_ms", out.stats.elapsed_ms}};
  if (out.verdict == syndetic::Verdict::Counterexample) j["counterexample"] = out.selection;
  return j;
}

}  // namespace gpfree::io
