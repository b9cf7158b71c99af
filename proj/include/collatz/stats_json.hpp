#pragma once

// JSON rendering of a run's statistics. Values that can exceed 64 bits are
// emitted as decimal strings; ratios as fixed 4-decimal strings. The config
// object records only parameters that influence the result, so two runs
// that must agree (different thread counts, different shardings unioned)
// serialize byte-identically except for wall_seconds.

#include <json.hpp>

#include "verifier.hpp"

namespace collatz {

using ordered_json = nlohmann::ordered_json;

inline std::string ratio_string(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", r);
  return buf;
}

inline ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["n_bits"] = cfg.N;
  j["a"] = cfg.A;
  j["b"] = cfg.B;
  j["bv_count"] = cfg.i_max;
  j["mode"] = mode_name(cfg.mode);
  j["shard"] = std::to_string(cfg.shard_index) + "/" + std::to_string(cfg.shard_count);
  j["merge_rule"] = cfg.merge_rule == MergeTermRule::require_odd_step ? "require_odd_step"
                    : cfg.merge_rule == MergeTermRule::skip_k0        ? "skip_k0"
                                                                      : "all_k";
  j["run_rule"] =
      cfg.run_rule == RunTermRule::seal_early ? "seal_early" : "seal_anywhere";
  return j;
}

inline ordered_json stats_to_json(const RunConfig& cfg, const RunStats& st) {
  ordered_json j;
  j["config"] = config_to_json(cfg);
  j["explicit_checked"] = st.explicit_checked;
  j["excluded_by"] = {{"descent", st.descent},
                      {"path_merge", st.path_merge},
                      {"oee", st.oee},
                      {"mod9", st.mod9},
                      {"bv", st.bv}};
  j["checksum"] = {st.checksum_n, st.checksum_steps, st.checksum_count};
  ordered_json recs = ordered_json::array();
  for (const auto& r : st.path_records)
    recs.push_back({to_string_u128(r.n), to_string_u128(r.t),
                    r.n > 1 ? ratio_string(r.ratio) : ""});
  j["path_records"] = recs;
  j["overflow_retries"] = st.overflow_retries;
  j["wall_seconds"] = st.wall_seconds;
  return j;
}

// The comparable portion: everything except timing.
inline std::string stats_fingerprint(const RunConfig& cfg, const RunStats& st) {
  ordered_json j = stats_to_json(cfg, st);
  j.erase("wall_seconds");
  return j.dump();
}

}  // namespace collatz
