#pragma once

// Steps 2 and 3 of the search: every depth-M survivor class brings a window
// of 2^A candidates n = n0 + a 2^M whose step-M values sit at adjacent
// indices of the lookahead vector for its odd count f, so one shifted load
// and one AND with the mod-9 row for n0 kill most of the window. Survivors
// get an explicit tail check with 16-step jumps. Statistics are a
// commutative monoid so any sharding or thread count produces identical
// output.

#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "bitvectors.hpp"
#include "negative.hpp"
#include "prefix_search.hpp"

namespace collatz {

using bigint = boost::multiprecision::cpp_int;

// ----- configuration ------------------------------------------------------

struct RunConfig {
  u32 N = 0;
  u32 A = 6;
  u32 B = 24;
  u32 i_max = 8;  // vectors BV_0 .. BV_{i_max-1}
  Mode mode = Mode::positive;
  u32 split_depth = 0;  // 0 = automatic (depends only on N and A)
  u32 shard_index = 0;
  u32 shard_count = 1;
  u32 threads = 1;
  MergeTermRule merge_rule = MergeTermRule::require_odd_step;
  RunTermRule run_rule = RunTermRule::seal_early;
  std::string cache_dir;  // empty: build vectors in memory, no disk cache

  u32 M() const { return N - A; }
  u32 auto_split_depth() const { return std::min(M(), (u32)16); }

  // Empty string when valid, otherwise the violated constraint.
  std::string validate() const {
    if (A < 1 || A > 6) return "A must be in [1, 6] (window mask is one 64-bit word)";
    if (B < A) return "B must be >= A";
    if (B < 6 || B > 28) return "B must be in [6, 28]";
    if (N <= A + 2) return "N - A must exceed 2";
    if (N > 80) return "N must be at most 80 (prefix values stay within 128 bits)";
    if (f_min(N - A) + i_max > Pow3Table::max_f)
      return "f_min(N-A) + i_max exceeds the power-of-3 table";
    if (shard_count < 1) return "shard count must be at least 1";
    if (shard_index >= shard_count) return "shard index must be below shard count";
    if (threads < 1) return "thread count must be at least 1";
    if (split_depth != 0 && (split_depth <= 2 || split_depth > M()))
      return "split depth must be in (2, N-A]";
    return "";
  }
};

// ----- statistics ---------------------------------------------------------

struct RunStats {
  u64 explicit_checked = 0;
  // excluded_by: class-level sieves weighted by members below 2^N,
  // window-level sieves counted per candidate.
  u64 descent = 0;
  u64 path_merge = 0;
  u64 oee = 0;
  u64 mod9 = 0;
  u64 bv = 0;
  u64 checksum_n = 0;      // sum of explicitly checked n, mod 2^64
  u64 checksum_steps = 0;  // sum of their total step counts, mod 2^64
  u64 checksum_count = 0;
  u64 overflow_retries = 0;
  u64 prefix_records = 0;   // depth-M survivors seen
  u64 below_f_min = 0;      // survivors that skip all window sieves
  u64 above_i_max = 0;      // survivors with only the mod-9 window sieve
  std::vector<PathRecord> path_records;
  double wall_seconds = 0;

  void merge(const RunStats& o) {
    explicit_checked += o.explicit_checked;
    descent += o.descent;
    path_merge += o.path_merge;
    oee += o.oee;
    mod9 += o.mod9;
    bv += o.bv;
    checksum_n += o.checksum_n;
    checksum_steps += o.checksum_steps;
    checksum_count += o.checksum_count;
    overflow_retries += o.overflow_retries;
    prefix_records += o.prefix_records;
    below_f_min += o.below_f_min;
    above_i_max += o.above_i_max;
    path_records.insert(path_records.end(), o.path_records.begin(),
                        o.path_records.end());
    path_records = finalize_records(std::move(path_records));
    wall_seconds += o.wall_seconds;
  }
};

inline void update_checksum(RunStats& st, u128 n, u64 total_steps) {
  st.checksum_n += lo64(n);
  st.checksum_steps += total_steps;
  st.checksum_count += 1;
}

// ----- precomputed vectors --------------------------------------------------

struct VectorSet {
  std::vector<SieveVector> bvs;
  Mod9Vectors m9;
  u32 f_lo = 0;  // f of bvs[0]
};

struct VectorLoad {
  VectorSet vs;
  CacheStatus status = CacheStatus::ok;
  std::string bad_file;
  u32 rebuilt = 0;  // vectors built rather than loaded
};

// Load every vector from cfg.cache_dir, building and saving on a plain
// miss (io_error). Any other load failure is reported and aborts: a
// corrupt or mismatched cache should be inspected, not silently replaced.
inline VectorLoad load_or_build_vectors(const RunConfig& cfg) {
  VectorLoad out;
  out.vs.f_lo = f_min(cfg.M());
  const bool cached = !cfg.cache_dir.empty();
  auto dir = cfg.cache_dir;
  if (cached && dir.back() != '/') dir += '/';

  for (u32 i = 0; i < cfg.i_max; i++) {
    SieveVector v;
    std::string path = dir + bv_cache_name(cfg.N, cfg.A, cfg.B, i, cfg.mode);
    CacheStatus st = cached
                         ? load_sieve_vector(path, cfg.N, cfg.A, cfg.B, i, cfg.mode, &v)
                         : CacheStatus::io_error;
    if (st == CacheStatus::io_error) {
      v = build_bv(cfg.N, cfg.A, cfg.B, i, cfg.mode, cfg.merge_rule, cfg.run_rule,
                   cfg.threads);
      out.rebuilt++;
      if (cached && save_sieve_vector(path, v) != CacheStatus::ok) {
        out.status = CacheStatus::io_error;
        out.bad_file = path;
        return out;
      }
    } else if (st != CacheStatus::ok) {
      out.status = st;
      out.bad_file = path;
      return out;
    }
    out.vs.bvs.push_back(std::move(v));
  }

  std::string path = dir + mod9_cache_name(cfg.N, cfg.A, cfg.mode);
  CacheStatus st =
      cached ? load_mod9(path, cfg.N, cfg.A, cfg.mode, &out.vs.m9) : CacheStatus::io_error;
  if (st == CacheStatus::io_error) {
    out.vs.m9 = build_mod9(cfg.N, cfg.A, cfg.mode);
    out.rebuilt++;
    if (cached && save_mod9(path, out.vs.m9) != CacheStatus::ok) {
      out.status = CacheStatus::io_error;
      out.bad_file = path;
    }
  } else if (st != CacheStatus::ok) {
    out.status = st;
    out.bad_file = path;
  }
  return out;
}

// ----- window stage ---------------------------------------------------------

// Survivor mask for one depth-M record: bit a = candidate n0 + a 2^M still
// needs its tail checked. A bit killed by the mod-9 row counts as mod9 even
// if the lookahead vector would also have killed it; only bits that passed
// mod-9 count toward bv.
inline u64 window_mask(const PrefixRecord& rec, const VectorSet& vs,
                       const RunConfig& cfg, RunStats& st) {
  const u64 full = (cfg.A == 6) ? ~(u64)0 : (((u64)1 << cfg.A) - 1);
  const u32 width = (u32)1 << cfg.A;

  if (rec.f < vs.f_lo) {
    st.below_f_min++;
    return full;  // no window sieve applies; tail-check everything
  }

  const u64 m9row = vs.m9.mask64((u32)mod9_u128(rec.n0));
  st.mod9 += (u64)std::popcount(~m9row & full);

  if (rec.f >= vs.f_lo + cfg.i_max) {
    st.above_i_max++;
    return m9row;
  }

  const SieveVector& bv = vs.bvs[rec.f - vs.f_lo];
  const u64 bmask = ((u64)1 << cfg.B) - 1;
  const u64 start = ((u64)(rec.m & bmask) * inv_pow3(rec.f, cfg.B)) & bmask;
  const u64 w = bv.bits.window(start, width);
  st.bv += (u64)std::popcount(m9row & ~w & full);
  return m9row & w;
}

// ----- tail stage -----------------------------------------------------------

enum class TailOutcome : u8 { descended, cycle_hit, overflow };

struct TailResult {
  TailOutcome outcome = TailOutcome::descended;
  u128 max_excursion = 0;
  u64 steps = 0;  // exact steps from `start` to the first terminating value
};

// Iterate from start = T^M(n) until the value falls below n (or, in
// negative mode, lands in the cycle set). Blocks of 16 go through the jump
// table whenever the block provably stays above n (16 halvings shrink by at
// most 2^16) and provably cannot improve the excursion maximum (16 steps
// grow by less than 2^16); otherwise the block is walked a step at a time,
// so the reported maximum and step count match a single-step simulation
// exactly.
inline TailResult tail_check(u128 n, u128 start, const JumpTable& tbl, Mode mode) {
  const Rule rule = rule_for(mode);
  const u32 K = tbl.k;
  TailResult res;
  res.max_excursion = start;
  u128 v = start;

  for (;;) {
    if (v < n) return res;
    if (mode == Mode::negative && CycleSet::contains(v)) {
      res.outcome = TailOutcome::cycle_hit;
      return res;
    }
    const bool can_shift = v <= (U128_MAX >> K);
    if (can_shift && (v >> K) >= n && (v << K) <= res.max_excursion) {
      JumpResult jr = jump(v, tbl);
      if (jr.overflow) {
        res.outcome = TailOutcome::overflow;
        return res;
      }
      v = jr.value;
      res.steps += K;
      continue;
    }
    for (u32 j = 0; j < K; j++) {
      u128 next;
      if (step_checked(v, rule, &next)) {
        res.outcome = TailOutcome::overflow;
        return res;
      }
      v = next;
      res.steps++;
      if (v > res.max_excursion) res.max_excursion = v;
      if (v < n) return res;
      if (mode == Mode::negative && CycleSet::contains(v)) {
        res.outcome = TailOutcome::cycle_hit;
        return res;
      }
    }
  }
}

// Arbitrary-precision fallback for the rare candidate whose values leave
// 128 bits: redo the whole trajectory from n, skip the M prefix steps the
// class walk already accounted for, then run the tail to termination. The
// excursion maximum is not tracked here (it may not fit the record type);
// the retry counter makes the event visible.
inline TailResult tail_check_big(u128 n, u32 prefix_steps, Mode mode) {
  const bigint bn = (bigint(hi64(n)) << 64) + lo64(n);
  bigint v = bn;
  auto step = [&](bigint& x) {
    if ((x & 1) == 0)
      x >>= 1;
    else if (mode == Mode::positive)
      x = (3 * x + 1) / 2;
    else
      x = (3 * x - 1) / 2;
  };
  for (u32 j = 0; j < prefix_steps; j++) step(v);
  TailResult res;
  for (;;) {
    if (v < bn) return res;
    if (mode == Mode::negative && v <= CycleSet::kMax &&
        CycleSet::contains(static_cast<u64>(v))) {
      res.outcome = TailOutcome::cycle_hit;
      return res;
    }
    step(v);
    res.steps++;
  }
}

// ----- bootstrap ------------------------------------------------------------

// Direct verification of every n up to `limit` by single steps. Covers the
// base of the induction and every trajectory-value cutoff the sieve
// theorems assume, since any later dip below `limit` is a dip below n.
inline bool bootstrap_check(u64 limit, Mode mode) {
  const Rule rule = rule_for(mode);
  for (u64 n = 2; n <= limit; n++) {
    u128 v = n;
    for (;;) {
      u128 next;
      if (step_checked(v, rule, &next)) return false;
      v = next;
      if (v < n) break;
      if (mode == Mode::negative && CycleSet::contains(v)) break;
      if (v == n) {
        // returned to start: only legal inside a known cycle
        if (mode == Mode::negative && CycleSet::contains(v)) break;
        return false;
      }
    }
  }
  return true;
}

constexpr u64 kBootstrapLimit = (u64)1 << 17;

// ----- full pipeline --------------------------------------------------------

namespace detail {

struct Worker {
  const RunConfig* cfg;
  const VectorSet* vs;
  const JumpTable* tbl;
  bool track_records;
  RunStats stats;

  void process_record(const PrefixRecord& rec) {
    RunConfig const& c = *cfg;
    stats.prefix_records++;
    const u64 mask = window_mask(rec, *vs, c, stats);
    if (!mask) return;
    const u32 M = c.M();
    const bool p3_ovf = rec.f > Pow3Table::max_f;
    const u128 p3f = p3_ovf ? 0 : pow3[rec.f];

    u64 rest = mask;
    while (rest) {
      const u32 a = (u32)std::countr_zero(rest);
      rest &= rest - 1;
      const u128 n = rec.n0 + ((u128)a << M);
      u128 start = 0;
      bool ovf = p3_ovf || checked_mul(p3f, a, &start) ||
                 checked_add(start, rec.m, &start);
      TailResult tr;
      bool retried = false;
      if (!ovf) {
        tr = tail_check(n, start, *tbl, c.mode);
        ovf = (tr.outcome == TailOutcome::overflow);
      }
      if (ovf) {
        stats.overflow_retries++;
        retried = true;
        tr = tail_check_big(n, M, c.mode);
      }
      stats.explicit_checked++;
      update_checksum(stats, n, (u64)M + tr.steps);
      if (track_records && !retried)
        stats.path_records.push_back(PathRecord{n, std::max(n, tr.max_excursion), 0, ""});
    }
  }

  void process_root(const SearchNode& root) {
    RunConfig const& c = *cfg;
    const u32 N = c.N;
    PrefixStats ps;
    SearchNode bad;
    bool ok = walk_prefixes(
        root, c.M(), c.mode, ps, [&](const SearchNode& nd) { process_record(PrefixRecord{nd.n0, nd.m, (u16)nd.f}); },
        [&](const SearchNode& nd, Exclusion why) {
          const u64 members = (u64)1 << (N - nd.k);
          if (why == Exclusion::descent) stats.descent += members;
          else if (why == Exclusion::path_merge) stats.path_merge += members;
          else stats.oee += members;
        },
        &bad);
    // 128-bit overflow inside the walk cannot be recovered per-candidate;
    // it is outside every supported configuration.
    assert(ok);
    (void)ok;
  }
};

}  // namespace detail

// Whole-shard run. Class exclusions above the split depth belong to shard 0
// so that a union of shard stats equals an unsharded run.
inline RunStats verify_range(const RunConfig& cfg, const VectorSet& vs) {
  assert(cfg.validate().empty());
  const auto t0 = std::chrono::steady_clock::now();

  // Induction base: the sieve theorems assume trajectory values above a
  // fixed cutoff, and any later dip below this limit is a dip below n.
  const u64 base = (cfg.N >= 17) ? kBootstrapLimit : (((u64)1 << cfg.N) - 1);
  bool base_ok = bootstrap_check(base, cfg.mode);
  assert(base_ok);
  (void)base_ok;

  RunStats total;
  const u32 split = cfg.split_depth ? cfg.split_depth : cfg.auto_split_depth();
  const bool track = cfg.N <= 28;  // candidate retention is per explicit n
  const JumpTable tbl = build_jump_table(16, rule_for(cfg.mode));

  // Enumerate split roots, attributing pre-split exclusions to shard 0.
  SplitSpec spec;
  spec.depth = split;
  {
    PrefixStats ps;
    bool ok = walk_prefixes(
        search_root(cfg.mode), split, cfg.mode, ps,
        [&](const SearchNode& nd) { spec.roots.push_back(nd); },
        [&](const SearchNode& nd, Exclusion why) {
          if (cfg.shard_index != 0) return;
          const u64 members = (u64)1 << (cfg.N - nd.k);
          if (why == Exclusion::descent) total.descent += members;
          else if (why == Exclusion::path_merge) total.path_merge += members;
          else total.oee += members;
        },
        nullptr);
    assert(ok);
    (void)ok;
  }
  std::vector<SearchNode> mine = shard_roots(spec, cfg.shard_index, cfg.shard_count);

  // Split-depth survivors that are already at depth M (split == M) are
  // emitted as records by walk_prefixes when process_root runs on them.
  auto run_worker = [&](size_t begin, size_t step, RunStats* out) {
    detail::Worker w;
    w.cfg = &cfg;
    w.vs = &vs;
    w.tbl = &tbl;
    w.track_records = track;
    for (size_t r = begin; r < mine.size(); r += step) w.process_root(mine[r]);
    *out = std::move(w.stats);
  };

  if (cfg.threads == 1) {
    RunStats st;
    run_worker(0, 1, &st);
    total.merge(st);
  } else {
    std::vector<RunStats> parts(cfg.threads);
    std::vector<std::thread> pool;
    for (u32 t = 0; t < cfg.threads; t++)
      pool.emplace_back(run_worker, t, cfg.threads, &parts[t]);
    for (auto& th : pool) th.join();
    for (auto& st : parts) total.merge(st);
  }

  for (auto& r : total.path_records)
    r.ratio = (r.n > 1) ? std::log((double)r.t) / std::log((double)r.n) : 0.0;

  total.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return total;
}

inline RunStats verify_range(const RunConfig& cfg) {
  VectorLoad vl = load_or_build_vectors(cfg);
  assert(vl.status == CacheStatus::ok);
  return verify_range(cfg, vl.vs);
}

}  // namespace collatz
