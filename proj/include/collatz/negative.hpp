#pragma once

// Negative-integer analogue. Trajectories of negative n under T mirror
// trajectories of -n under T'(v) = v/2 or (3v-1)/2, so everything runs on
// positive representatives. Unlike the positive side there are three known
// cycles, so "verified" means "reaches the cycle set" and the tail check
// needs a membership test in addition to the value < n test.

#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"

namespace collatz {

// All values of the known T'-cycles: the fixed point 1 (with its even
// preimage 2, i.e. the (-1, -2) loop on the C' scale), the 3-cycle through
// 5, and the 11-cycle through 17.
struct CycleSet {
  static constexpr u64 kMax = 136;

  static constexpr bool contains(u128 v) {
    if (v > kMax) return false;
    constexpr u64 lo =  // bits 0..63: 1, 2, 5, 7, 10, 17, 25, 34, 37, 41, 55, 61
        ((u64)1 << 1) | ((u64)1 << 2) | ((u64)1 << 5) | ((u64)1 << 7) |
        ((u64)1 << 10) | ((u64)1 << 17) | ((u64)1 << 25) | ((u64)1 << 34) |
        ((u64)1 << 37) | ((u64)1 << 41) | ((u64)1 << 55) | ((u64)1 << 61);
    constexpr u64 hi =  // bits 64..127: 68, 82, 91
        ((u64)1 << (68 - 64)) | ((u64)1 << (82 - 64)) | ((u64)1 << (91 - 64));
    constexpr u64 top = (u64)1 << (136 - 128);  // bits 128..: 136
    u64 x = (u64)v;
    if (x < 64) return (lo >> x) & 1;
    if (x < 128) return (hi >> (x - 64)) & 1;
    return (top >> (x - 128)) & 1;
  }
};

// The three cycles in orbit order, for closure/period tests.
inline const std::vector<std::vector<u64>>& t_prime_cycles() {
  static const std::vector<std::vector<u64>> cycles = {
      {1},  // T'(1) = 1; the period-2 loop 1 -> 2 -> 1 lives on the C' scale
      {5, 7, 10},
      {17, 25, 37, 55, 82, 41, 61, 91, 136, 68, 34},
  };
  return cycles;
}

// Budget form of the Descent Sieve for T': the value comparison m < n0 is
// not class-stable here, but 485 f <= 306 k forces 3^f < 2^k and T' shrinks
// by at least 2^k / 3^f over k steps with f odd ones.
inline bool descent_check_neg(u32 k, u32 f) {
  return 306 * (i64)k - 485 * (i64)f >= 0;
}

// ----- path records -------------------------------------------------------

struct PathRecord {
  u128 n = 0;
  u128 t = 0;       // highest value in the sequence starting at n
  double ratio = 0; // log(t) / log(n); meaningless for n = 1
  std::string comment;
};

// Keep only true records from (n, max) candidates gathered in any order:
// sort by n, keep strict maxima.
inline std::vector<PathRecord> finalize_records(std::vector<PathRecord> cand) {
  std::sort(cand.begin(), cand.end(),
            [](const PathRecord& a, const PathRecord& b) { return a.n < b.n; });
  std::vector<PathRecord> out;
  for (auto& r : cand) {
    if (!out.empty() && r.t <= out.back().t) continue;
    if (!out.empty() && r.n == out.back().n) continue;
    out.push_back(std::move(r));
  }
  return out;
}

// Annotation convention of the published table: even starts and cycle
// members are named, and a record is tagged "log ratio" when it pushes the
// running maximum of log(t)/log(n) while sitting near the conjectured
// limsup of 2 (ratio at least 1.9).
inline void annotate_records(std::vector<PathRecord>& recs, Mode mode) {
  double best_ratio = 0;
  for (auto& r : recs) {
    r.ratio = (r.n > 1)
                  ? std::log((double)r.t) / std::log((double)r.n)
                  : 0.0;
    if ((r.n & 1) == 0)
      r.comment = "even";
    else if (mode == Mode::negative && CycleSet::contains(r.n))
      r.comment = "cycle";
    else if (mode == Mode::positive && r.n == 1)
      r.comment = "cycle";
    else if (r.n > 1 && r.ratio > best_ratio && r.ratio >= 1.9)
      r.comment = "log ratio";
    if (r.n > 1) best_ratio = std::max(best_ratio, r.ratio);
  }
}

// Ascending scan for path records of T' (or T). Sound without any sieve:
// once the trajectory falls below n or returns to n, its remaining maximum
// is at most the best maximum of a smaller start, which the running record
// already dominates. Sieve-excluded starts can still hold records (their
// peak may come before the guaranteed descent), hence this direct scan and
// not the search pipeline.
inline std::vector<PathRecord> scan_path_records(u64 limit, Mode mode) {
  const Rule rule = rule_for(mode);
  std::vector<PathRecord> recs;
  u128 record_max = 0;
  for (u64 n = 1; n <= limit; n++) {
    u128 v = n;
    u128 mx = n;
    for (;;) {
      v = (rule == Rule::T) ? t_step(v) : t_prime_step(v);
      if (v < n || v == n) break;
      if (v > mx) mx = v;
    }
    if (mx > record_max) {
      record_max = mx;
      recs.push_back(PathRecord{n, mx, 0, ""});
    }
  }
  annotate_records(recs, mode);
  return recs;
}

inline std::vector<PathRecord> negative_records(u64 limit) {
  return scan_path_records(limit, Mode::negative);
}

}  // namespace collatz
