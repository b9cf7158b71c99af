// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit if
// any criterion fails. Reference values are previously published numbers; where
// the rebuilt artifact deviates, the deviation is printed rather than
// papered over.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "collatz/bitvectors.hpp"
#include "collatz/negative.hpp"
#include "collatz/oracle.hpp"
#include "collatz/stats_json.hpp"
#include "collatz/verifier.hpp"

using namespace collatz;

namespace {

bool g_all_ok = true;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

void verdict(int idx, bool ok, const char* what, double secs) {
  if (!ok) g_all_ok = false;
  std::printf("[%s] %d. %s (%.1f s)\n", ok ? "PASS" : "FAIL", idx, what, secs);
  std::fflush(stdout);
}

void note(const char* fmt, ...) {
  std::va_list ap;
  va_start(ap, fmt);
  std::printf("       ");
  std::vprintf(fmt, ap);
  std::printf("\n");
  va_end(ap);
}

// ----- criterion 1: lookahead vector densities ------------------------------

const u64 kPublishedPop[8] = {333343,  1590275,  3837929,  6750160,
                              9809263, 12495505, 14479396, 15712298};

bool criterion_densities() {
  bool ok = true;
  const double total = (double)((u64)1 << 24);
  for (u32 i = 0; i < 8; i++) {
    SieveVector v = build_bv(72, 6, 24, i, Mode::positive);
    const u64 got = v.bits.popcount();
    const u64 want = kPublishedPop[i];
    const double dev = std::fabs((double)got - (double)want) / total;
    const char* tag;
    if (got == want) {
      tag = "exact";
    } else if (dev <= 1e-4) {
      tag = "within 1e-4";
    } else {
      tag = "EXCEEDS 1e-4";
      ok = false;
    }
    note("BV_%u f=%u density %s (reference %s, deviation %.3e, %s)", i, v.f,
         density_string(got, (u64)1 << 24).c_str(),
         density_string(want, (u64)1 << 24).c_str(), dev, tag);
  }
  if (!ok)
    note("reconstruction from the stated rules alone does not reproduce two "
         "reference densities; see README for the attempted reconciliations");
  return ok;
}

// ----- criteria 2 and 3: case counts and their growth -----------------------

const u64 kPublishedCounts[6] = {31109345,  56414851,  106551583,
                                 205942265, 390055737, 756583624};

bool criterion_counts(std::vector<u64>* out) {
  bool ok = true;
  for (u32 N = 35; N <= 40; N++) {
    RunConfig cfg;
    cfg.N = N;
    cfg.mode = Mode::positive;
    const double t0 = now_seconds();
    RunStats st = verify_range(cfg);
    const double dt = now_seconds() - t0;
    out->push_back(st.explicit_checked);
    const u64 want = kPublishedCounts[N - 35];
    const double dev = std::fabs((double)st.explicit_checked - (double)want) /
                       (double)want;
    if (dev > 0.05) ok = false;
    note("N=%u explicitly checked %llu (reference %llu, %+.3f%%, %.0f s)", N,
         (unsigned long long)st.explicit_checked, (unsigned long long)want,
         100.0 * ((double)st.explicit_checked - (double)want) / (double)want, dt);
  }
  return ok;
}

bool criterion_ratios(const std::vector<u64>& counts) {
  bool ok = true;
  for (size_t j = 1; j < counts.size(); j++) {
    const double r = (double)counts[j] / (double)counts[j - 1];
    if (r < 1.7 || r > 2.0) ok = false;
    note("N=%zu/N=%zu ratio %.4f", 35 + j, 34 + j, r);
  }
  return ok;
}

// ----- criterion 6: negative path records ------------------------------------

struct RecordRow {
  u64 n;
  u64 t;
  const char* ratio;  // published ratio string; null = not compared
  const char* comment;
};

// Rows as published. Three ratio strings disagree with log(t)/log(n) at
// 4 decimals and are compared informationally only (see README).
const RecordRow kRecordRows[28] = {
    {1, 1, nullptr, "cycle"},
    {2, 2, "1.0000", "even"},
    {3, 4, "1.2619", ""},
    {5, 10, "1.4307", "cycle"},
    {9, 28, nullptr, ""},          // published table says 1.5000, log ratio gives 1.5166
    {17, 136, "1.7340", "cycle"},
    {33, 244, "1.5722", ""},
    {65, 820, nullptr, ""},        // published table says 1.6072, log ratio gives 1.6073
    {129, 2188, "1.5825", ""},
    {153, 16606, nullptr, "log ratio"},  // published table 1.9324, log ratio 1.9317
    {321, 66430, "1.9239", ""},
    {1601, 131356, "1.5973", ""},
    {1889, 413344, "1.7143", ""},
    {3393, 417718, "1.5921", ""},
    {4097, 957664, "1.6557", ""},
    {6929, 1439776, "1.6034", ""},
    {8193, 1594324, "1.5849", ""},
    {10497, 2908468, "1.6075", ""},
    {11025, 40219750, "1.8812", ""},
    {18273, 44442028, "1.7945", ""},
    {28161, 195046228, "1.8631", ""},
    {74585, 477250624, "1.7811", ""},
    {85265, 510919012, "1.7661", ""},
    {149345, 4837921750ull, "1.8717", ""},
    {558341, 39156432022ull, "1.8432", ""},
    {839429, 39246157990ull, "1.7883", ""},
    {1022105, 45360267382ull, "1.7733", ""},
    {1467393, 3293075932912ull, "2.0299", "log ratio"},
};

bool criterion_records() {
  auto recs = negative_records((u64)1 << 21);
  bool ok = true;
  size_t hit = 0;
  for (size_t j = 0; j < 28; j++) {
    const RecordRow& want = kRecordRows[j];
    const PathRecord* got = nullptr;
    for (const auto& r : recs)
      if (r.n == want.n) {
        got = &r;
        break;
      }
    if (!got) {
      note("row %zu: n=%llu missing from the scan", j + 1,
           (unsigned long long)want.n);
      ok = false;
      continue;
    }
    hit++;
    if (got->t != want.t || got->comment != want.comment) {
      note("row %zu: got t=%s comment='%s', want t=%llu '%s'", j + 1,
           to_string_u128(got->t).c_str(), got->comment.c_str(),
           (unsigned long long)want.t, want.comment);
      ok = false;
      continue;
    }
    if (got->n <= 1) continue;
    const std::string rs = ratio_string(got->ratio);
    if (want.ratio == nullptr) {
      note("row %zu: n=%llu computed ratio %s (published table differs in "
           "the last digits; informational)",
           j + 1, (unsigned long long)want.n, rs.c_str());
    } else if (rs != want.ratio) {
      note("row %zu: n=%llu ratio %s, want %s", j + 1,
           (unsigned long long)want.n, rs.c_str(), want.ratio);
      ok = false;
    }
  }
  note("all %zu published rows reproduced; scan finds %zu records total", hit,
       recs.size());
  for (const auto& r : recs) {
    bool published = false;
    for (size_t j = 0; j < 28; j++)
      if (kRecordRows[j].n == r.n) published = true;
    if (!published)
      note("extra record n=%s t=%s ratio %s: beats every smaller start but "
           "is absent from the published table",
           to_string_u128(r.n).c_str(), to_string_u128(r.t).c_str(),
           ratio_string(r.ratio).c_str());
  }
  return ok && hit == 28;
}

// ----- criterion 7: scheduling invariance ------------------------------------

bool criterion_scheduling() {
  RunConfig cfg;
  cfg.N = 32;
  cfg.mode = Mode::positive;
  VectorLoad vl = load_or_build_vectors(cfg);
  if (vl.status != CacheStatus::ok) {
    note("vector build failed: %s", cache_status_name(vl.status));
    return false;
  }

  cfg.threads = 1;
  RunStats one = verify_range(cfg, vl.vs);
  const std::string base = stats_fingerprint(cfg, one);
  bool ok = true;
  for (u32 t : {4u, 8u}) {
    cfg.threads = t;
    RunStats st = verify_range(cfg, vl.vs);
    if (stats_fingerprint(cfg, st) != base) {
      note("thread count %u changed the result", t);
      ok = false;
    }
  }
  cfg.threads = 1;
  note("worker counts 1/4/8: checksums and stats identical: %s",
       ok ? "yes" : "NO");

  RunStats merged;
  for (u32 s = 0; s < 64; s++) {
    RunConfig part = cfg;
    part.shard_index = s;
    part.shard_count = 64;
    merged.merge(verify_range(part, vl.vs));
  }
  const bool shard_ok = stats_fingerprint(cfg, merged) == base;
  note("union of 64 shards matches the unsharded run bit for bit: %s",
       shard_ok ? "yes" : "NO");
  return ok && shard_ok;
}

// ----- criterion 8: property suites ------------------------------------------

bool prop_composition() {
  std::mt19937_64 rng(101);
  for (int s = 0; s < 2000; s++) {
    const u32 k = 1 + (u32)(rng() % 40);
    const u128 n0 = rng() & (((u64)1 << 40) - 1);
    const u64 a = rng() & (((u64)1 << 30) - 1);
    const Rule rule = (s & 1) ? Rule::TPrime : Rule::T;
    IterResult base = iterate(n0, k, rule);
    IterResult shifted = iterate(n0 + ((u128)a << k), k, rule);
    if (base.overflow || shifted.overflow) return false;
    if (shifted.value != base.value + pow3[base.odd_steps] * (u128)a) return false;
    if (shifted.odd_steps != base.odd_steps) return false;
  }
  return true;
}

bool prop_last_bits() {
  std::mt19937_64 rng(102);
  for (int s = 0; s < 2000; s++) {
    const u32 k = 1 + (u32)(rng() % 40);
    const u128 n = rng();
    const u128 other = n + ((u128)(rng() % ((u64)1 << 20) + 1) << k);
    const Rule rule = (s & 1) ? Rule::TPrime : Rule::T;
    ParityPattern a = parity_pattern(n, k, rule);
    ParityPattern b = parity_pattern(other, k, rule);
    if (a.bits != b.bits || a.len != b.len) return false;
  }
  return true;
}

bool prop_descent_monotone() {
  std::mt19937_64 rng(103);
  int hits = 0;
  for (int s = 0; s < 200000 && hits < 10000; s++) {
    const u32 k = 3 + (u32)(rng() % 30);
    const u128 n0 = rng() & (((u64)1 << k) - 1);
    if (n0 < 3) continue;
    IterResult base = iterate(n0, k, Rule::T);
    if (base.overflow || base.value >= n0) continue;
    hits++;
    const u64 a = rng() & (((u64)1 << 20) - 1);
    const u128 n = n0 + ((u128)a << k);
    IterResult it = iterate(n, k, Rule::T);
    if (it.overflow || it.value >= n) return false;
  }
  return hits == 10000;
}

bool prop_mod3_shortcut() {
  std::mt19937_64 rng(104);
  int qualified = 0;
  for (int s = 0; s < 100000; s++) {
    const Rule rule = (s & 1) ? Rule::TPrime : Rule::T;
    u128 v = (rng() & (((u64)1 << 44) - 1)) + 7;
    const u32 k = 1 + (u32)(rng() % 40);
    bool has_odd = false;
    u32 trailing = 0;
    for (u32 j = 0; j < k; j++) {
      if ((v & 1) != 0) {
        has_odd = true;
        trailing = 0;
      } else {
        trailing++;
      }
      v = (rule == Rule::T) ? t_step(v) : t_prime_step(v);
    }
    if (!has_odd) continue;
    qualified++;
    const u32 merge_residue = (rule == Rule::T) ? 2 : 1;
    const bool residue_hit = (u32)(v % 3) == merge_residue;
    if (residue_hit != (trailing % 2 == 0)) return false;
  }
  return qualified > 50000;
}

bool prop_bijectivity() {
  for (u32 f = 1; f <= 20; f++) {
    const u64 size = (u64)1 << 16;
    const u64 p3 = pow3_mod(f, 16);
    std::vector<bool> seen(size, false);
    for (u64 a = 0; a < size; a++) {
      const u64 idx = (a * p3) & (size - 1);
      if (seen[idx]) return false;
      seen[idx] = true;
    }
  }
  return true;
}

bool prop_parity_bijection() {
  for (Rule rule : {Rule::T, Rule::TPrime}) {
    for (u32 M = 2; M <= 12; M++) {
      std::vector<bool> seen((u64)1 << M, false);
      for (u64 n = 0; n < ((u64)1 << M); n++) {
        ParityPattern pat = parity_pattern(n, M, rule);
        u64 back = pattern_to_n(pat, rule);
        if (back != n) return false;
        u64 key = pat.bits & (((u64)1 << M) - 1);
        if (seen[key]) return false;
        seen[key] = true;
      }
    }
  }
  return true;
}

bool prop_cycle_closure() {
  const u64 members[16] = {1, 2, 5, 7, 10, 17, 25, 34, 37, 41, 55, 61, 68, 82, 91, 136};
  for (u64 v : members)
    if (!CycleSet::contains(t_prime_step(v))) return false;
  for (u64 n = 1; n <= 1000000; n++) {
    u128 v = n;
    u32 guard = 0;
    while (!CycleSet::contains(v)) {
      v = t_prime_step(v);
      if (++guard > 100000) return false;
    }
  }
  return true;
}

bool criterion_properties() {
  struct Suite {
    const char* name;
    bool (*run)();
  };
  const Suite suites[] = {
      {"shift composition", prop_composition},
      {"last-bits determinism", prop_last_bits},
      {"descent monotonicity", prop_descent_monotone},
      {"mod-3 merge shortcut", prop_mod3_shortcut},
      {"window permutation bijectivity", prop_bijectivity},
      {"parity-pattern bijection", prop_parity_bijection},
      {"cycle set closure", prop_cycle_closure},
  };
  bool ok = true;
  for (const Suite& s : suites) {
    const bool r = s.run();
    note("%s: %s", s.name, r ? "ok" : "FAILED");
    ok &= r;
  }
  return ok;
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n");

  double t0 = now_seconds();
  bool c1 = criterion_densities();
  verdict(1, c1, "lookahead vector densities (N=72, A=6, B=24)", now_seconds() - t0);

  t0 = now_seconds();
  std::vector<u64> counts;
  bool c2 = criterion_counts(&counts);
  verdict(2, c2, "explicitly checked counts, N=35..40", now_seconds() - t0);

  t0 = now_seconds();
  bool c3 = criterion_ratios(counts);
  verdict(3, c3, "consecutive count ratios within [1.7, 2.0]", now_seconds() - t0);

  t0 = now_seconds();
  bool c4 = (f_min(66) == 42) && (bv_threshold(66, 42) == 174);
  verdict(4, c4, "depth-66 budget bound: f_min 42, first threshold 174",
          now_seconds() - t0);

  t0 = now_seconds();
  ExhaustiveReport pos = exhaustive_verify(20, Mode::positive);
  ExhaustiveReport neg = exhaustive_verify(20, Mode::negative);
  note("positive: %llu certificates, %llu failures, %llu mismatches",
       (unsigned long long)pos.certificates(), (unsigned long long)pos.cert_failures,
       (unsigned long long)pos.mismatches);
  note("negative: %llu certificates, %llu failures, %llu mismatches",
       (unsigned long long)neg.certificates(), (unsigned long long)neg.cert_failures,
       (unsigned long long)neg.mismatches);
  verdict(5, pos.ok() && neg.ok(), "exhaustive cross-check below 2^20, both signs",
          now_seconds() - t0);

  t0 = now_seconds();
  bool c6 = criterion_records();
  verdict(6, c6, "negative path records below 2^21", now_seconds() - t0);

  t0 = now_seconds();
  bool c7 = criterion_scheduling();
  verdict(7, c7, "thread and shard scheduling invariance (N=32)", now_seconds() - t0);

  t0 = now_seconds();
  bool c8 = criterion_properties();
  verdict(8, c8, "property suites", now_seconds() - t0);

  std::printf("[NOTE] 9. out of scope by design: GPU paths, alternative "
              "modulus sieves, frontier extrapolations\n");

  std::printf("%s\n", g_all_ok ? "acceptance: all criteria passed"
                               : "acceptance: at least one criterion failed");
  return g_all_ok ? 0 : 1;
}
