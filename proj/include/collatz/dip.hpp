#pragma once

// Descent budgets. 485/306 is the classic rational over-approximation of
// log2(3): 3^306 = 0.9989... * 2^485, so 485*f <= 306*k implies
// 3^f / 2^k < 1 with a little room to spare. The budget ("dip") of a
// residue m mod 2^B is the best guaranteed margin over any prefix of the
// next B steps; a window vector bit stays set exactly when the margin
// cannot reach the required threshold and the candidate must be checked.

#include <algorithm>

#include "core.hpp"

namespace collatz {

constexpr i64 kDipP = 485;  // numerator:   485/306 > log2(3)
constexpr i64 kDipQ = 306;  // denominator: 3^306 < 2^485

// Smallest odd-step count a depth-M survivor can carry without the budget
// criterion already proving descent across the whole residue class.
constexpr u32 f_min(u32 M) {
  return (u32)((kDipQ * M + 1 + (kDipP - 1)) / kDipP);
}

// Margin a candidate with f odd steps over N-A levels must overcome.
constexpr i64 bv_threshold(u32 M, u32 f) { return kDipP * (i64)f - kDipQ * (i64)M; }

// Multiplicative inverse of 3^f mod 2^B (B <= 63). 3 * 0xaaaa...ab = 1 mod 2^64.
inline u64 inv_pow3(u32 f, u32 B) {
  assert(B >= 1 && B <= 63);
  u64 inv3 = 0xaaaaaaaaaaaaaaabULL;
  u64 r = 1;
  for (u32 i = 0; i < f; i++) r *= inv3;
  return r & (((u64)1 << B) - 1);
}

// Controls when the path-merge bonus term may be used while scoring a
// residue. The residue of T^k(m) mod 3 is only stable across everything
// sharing m's low B bits when the prefix contains an odd step, so
// require_odd_step is the sound default; the other two exist to compare
// against alternative published tabulations.
enum class MergeTermRule : u8 {
  require_odd_step,  // only k with f_k(m) >= 1
  skip_k0,           // any k >= 1
  all_k,             // any k >= 0
};

// Controls how late in the window an odd run may complete and still earn
// its run term. Published window-vector tabulations match seal_early: both
// sealing even steps land at index <= B-2, i.e. the run resolves with one
// step of the window to spare. seal_anywhere accepts seals running through
// the final step (index B-1) and over-fires slightly relative to the
// published counts.
enum class RunTermRule : u8 {
  seal_early,     // second sealing even at step index <= B-2
  seal_anywhere,  // second sealing even at step index <= B-1
};

// max over k in [0, B] of 306k - 485 f_k(m). Depends only on m mod 2^B.
inline i64 dip_base(u64 m, u32 B, Rule rule) {
  assert(B <= 32);
  u64 v = m & (B >= 64 ? ~(u64)0 : (((u64)1 << B) - 1));
  i64 best = 0;  // k = 0 term
  i64 f = 0;
  for (u32 k = 1; k <= B; k++) {
    if (v & 1) {
      f++;
      v = (rule == Rule::T) ? (3 * v + 1) / 2 : (3 * v - 1) / 2;
    } else {
      v >>= 1;
    }
    best = std::max(best, kDipQ * (i64)k - kDipP * f);
  }
  return best;
}

// Full budget: the plain terms plus
//   * a merge term 306(k-1) - 485(f_k - 1) whenever T^k(m) = 2 mod 3
//     (1 mod 3 under T'), because the class then joins the path of a value
//     one "virtual" halving-and-odd-step cheaper;
//   * a run term 306(k+1) - 485 f_k whenever T^k(m) starts a maximal odd
//     run that completes with two even steps inside the window, because
//     the class then joins the path of roughly half the run-start value.
inline i64 dip_full(u64 m, u32 B, Rule rule,
                    MergeTermRule merge_rule = MergeTermRule::require_odd_step,
                    RunTermRule run_rule = RunTermRule::seal_early) {
  assert(B <= 32);
  u64 v = m & (((u64)1 << B) - 1);
  u32 merge_residue = (rule == Rule::T) ? 2 : 1;

  i64 best = 0;
  if (merge_rule == MergeTermRule::all_k && v % 3 == merge_residue)
    best = std::max(best, -kDipQ + kDipP);

  // run bookkeeping: depth and odd count at the start of the newest odd run
  i64 f = 0;
  i64 run_start_k = -1, run_start_f = 0;
  u32 trailing_evens = 0;
  bool run_alive = false;

  for (u32 k = 1; k <= B; k++) {
    bool odd = (v & 1) != 0;
    if (odd) {
      if (!run_alive || trailing_evens != 0) {
        run_start_k = k - 1;
        run_start_f = f;
        run_alive = true;
      }
      trailing_evens = 0;
      f++;
      v = (rule == Rule::T) ? (3 * v + 1) / 2 : (3 * v - 1) / 2;
    } else {
      trailing_evens++;
      u32 seal_limit = (run_rule == RunTermRule::seal_early) ? B - 1 : B;
      if (run_alive && trailing_evens == 2) {
        if (k <= seal_limit)
          best = std::max(best, kDipQ * (run_start_k + 1) - kDipP * run_start_f);
        run_alive = false;
      }
      v >>= 1;
    }

    best = std::max(best, kDipQ * (i64)k - kDipP * f);

    bool merge_ok = (merge_rule == MergeTermRule::require_odd_step) ? f >= 1 : true;
    if (merge_ok && v % 3 == merge_residue)
      best = std::max(best, kDipQ * (i64)(k - 1) - kDipP * (f - 1));
  }
  return best;
}

}  // namespace collatz
