#pragma once

// The three residue-class sieves used while growing prefixes, plus the
// mod-9 preimage filter applied later per candidate. All of them prove
// "every member of this class eventually joins the trajectory of some
// smaller number", so excluded classes need no explicit check.

#include "dip.hpp"

namespace collatz {

enum class Exclusion : u8 { none, descent, path_merge, oee };

// Trailing-parity bookkeeping for one search branch. The first k steps of
// every member of a class mod 2^k share their parities, so this state is
// branch-wide; only the odd-run candidate is a concrete value and must be
// shifted when a sibling with a new high bit is split off.
struct SieveState {
  static constexpr u32 no_odd_yet = 0xffffffff;

  u128 oee_candidate = 0;  // (v-1)/2 (positive) or (v+1)/2 (negative) for
                           // the start value v of the newest maximal odd run
  u32 trailing_evens = no_odd_yet;  // even steps since the last odd step
  u32 run_start_depth = 0;          // step index where that run began
  u32 run_start_f = 0;              // odd steps before the run began
  bool oee_alive = false;  // candidate usable: inside the run or <= 2 evens past it
  bool oee_fired = false;  // the second trailing even step just completed

  bool has_odd() const { return trailing_evens != no_odd_yet; }
};

// Advance past one step taken at `depth` on `value` (which carries `f` odd
// steps before it). Sets oee_fired exactly when a maximal odd run has just
// been sealed by its second even step; the caller then compares the stored
// candidate against the class representative.
inline void sieve_state_advance(SieveState& s, bool odd, u128 value, u32 depth,
                                u32 f, Mode mode) {
  s.oee_fired = false;
  if (odd) {
    if (!s.oee_alive || s.trailing_evens != 0) {
      s.oee_candidate = (mode == Mode::positive) ? (value - 1) >> 1 : (value + 1) >> 1;
      s.run_start_depth = depth;
      s.run_start_f = f;
      s.oee_alive = true;
    }
    s.trailing_evens = 0;
  } else if (s.has_odd()) {
    s.trailing_evens++;
    if (s.oee_alive && s.trailing_evens == 2) {
      s.oee_fired = true;
      s.oee_alive = false;
    }
  }
}

// Splitting off the sibling n0 + 2^k shifts every earlier trajectory value:
// T^j(n0 + 2^k) = T^j(n0) + 3^{f_j} * 2^{k-j}. Keep the candidate (half of
// the depth-j run start, rounded) in sync. Returns false on overflow.
inline bool sieve_state_bump_candidate(SieveState& s, u32 k) {
  if (!s.oee_alive) return true;
  if (s.run_start_f > Pow3Table::max_f) return false;
  u128 shift;
  if (checked_mul(pow3[s.run_start_f], (u128)1 << (k - s.run_start_depth - 1), &shift))
    return false;
  return !checked_add(s.oee_candidate, shift, &s.oee_candidate);
}

// ----- the three class-level checks ------------------------------------

// Positive mode compares values: T^k(n0) < n0 transfers to every member of
// the class. Under T' that transfer fails (odd steps multiply by slightly
// less than 3/2), so the budget criterion replaces it: 485f <= 306k forces
// T'^k(n) <= n * 3^f / 2^k < n for every member.
inline bool descent_excludes(u128 n0, u128 m, u32 k, u32 f, Mode mode) {
  if (mode == Mode::positive) return m < n0;
  return kDipP * (i64)f <= kDipQ * (i64)k;
}

// An odd step lands on 2 mod 3 (T) / 1 mod 3 (T'), and every even step then
// toggles the residue, so "some odd step, evenly many evens since" pins
// m mod 3 without a division. u = (2m-1)/3 (resp. (2m+1)/3) is then odd
// with step(u) = m; if u < n0 the class joins a smaller trajectory.
// Comparisons are in cross-multiplied form: (2m-1)/3 < n0 <=> 2m <= 3n0,
// and (2m+1)/3 < n0 <=> 2m + 2 <= 3n0.
inline bool path_merge_excludes(const SieveState& s, u128 n0, u128 m, u32 k,
                                u32 f, Mode mode) {
  if (!s.has_odd() || (s.trailing_evens & 1)) return false;
  if (m > (U128_MAX >> 2)) return false;  // target would dwarf n0 anyway
  if (mode == Mode::positive) return 2 * m <= 3 * n0;
  // Under T' the transfer of u < n0 to the rest of the class is not free;
  // it needs 2 * 3^(f-1) <= 2^k (automatic in positive mode).
  if (f < 1 || f - 1 > Pow3Table::max_f) return false;
  if (k < 127 && 2 * pow3[f - 1] > ((u128)1 << k)) return false;
  return 2 * m + 2 <= 3 * n0;
}

// Sealed odd run: l >= 1 odd steps from value v followed by two evens mean
// the trajectory of v joins that of (v-1)/2 ((v+1)/2 under T') within l+2
// steps. If the stored candidate is below n0 the class is done.
inline bool oee_excludes(const SieveState& s, u128 n0, Mode mode) {
  if (!s.oee_fired) return false;
  if (mode == Mode::negative) {
    // transfer guard, mirroring the path-merge slope condition
    if (s.run_start_f > Pow3Table::max_f) return false;
    if (s.run_start_depth < 127 &&
        pow3[s.run_start_f] > ((u128)1 << (s.run_start_depth + 1)))
      return false;
  }
  return s.oee_candidate < n0;
}

// ----- mod 9 preimage filter -------------------------------------------

// n = 2,5,8 (mod 9) equals T((2n-1)/3) and n = 4 (mod 9) equals
// T^3((8n-5)/9), both preimages smaller than n; mirrored residues for T'.
// Bit r of the mask is set when residue r still needs checking.
constexpr u16 mod9_allowed_mask(Mode mode) {
  return mode == Mode::positive
             ? (u16)(0x1ff & ~((1u << 2) | (1u << 4) | (1u << 5) | (1u << 8)))
             : (u16)(0x1ff & ~((1u << 1) | (1u << 4) | (1u << 5) | (1u << 7)));
}

inline bool mod9_allows(u32 r, Mode mode) {
  return (mod9_allowed_mask(mode) >> r) & 1;
}

}  // namespace collatz
