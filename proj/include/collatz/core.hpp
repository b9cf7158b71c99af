#pragma once

// Step rules and the bit-level machinery shared by every stage:
//
//   T  (n) = n/2 if even, (3n+1)/2 if odd     (shortcut map)
//   C  (n) = n/2 if even, 3n+1    if odd      (classic map, oracle only)
//   T' (n) = n/2 if even, (3n-1)/2 if odd     (mirror of T on negatives,
//                                              run on |n|)
//
// Two facts drive everything else (both hold for T and T'):
//   * the parities of the first k steps of n depend only on n mod 2^k
//   * T^k(n0 + a*2^k) = T^k(n0) + 3^f * a, where f counts the odd steps
//     among the first k steps of n0
// The second one is what the jump tables and the prefix search expand on.

#include <cassert>
#include <vector>

#include "u128.hpp"

namespace collatz {

enum class Rule : u8 { T, C, TPrime };
enum class Mode : u8 { positive, negative };

constexpr Rule rule_for(Mode m) {
  return m == Mode::positive ? Rule::T : Rule::TPrime;
}

constexpr const char* mode_name(Mode m) {
  return m == Mode::positive ? "positive" : "negative";
}

// ----- single steps ---------------------------------------------------

// Each step returns true on 128-bit overflow. Odd branches are arranged so
// the intermediate values cannot wrap before the check:
//   n odd:  (3n+1)/2 = n + (n>>1) + 1,   (3n-1)/2 = n + (n>>1)
inline bool t_step_checked(u128 n, u128* out) {
  if ((n & 1) == 0) { *out = n >> 1; return false; }
  return checked_add(n, (n >> 1) + 1, out);
}

inline bool t_prime_step_checked(u128 n, u128* out) {
  if ((n & 1) == 0) { *out = n >> 1; return false; }
  return checked_add(n, n >> 1, out);
}

inline bool c_step_checked(u128 n, u128* out) {
  if ((n & 1) == 0) { *out = n >> 1; return false; }
  u128 t;
  if (checked_mul(n, 3, &t)) return true;
  return checked_add(t, 1, out);
}

inline bool step_checked(u128 n, Rule rule, u128* out) {
  switch (rule) {
    case Rule::T: return t_step_checked(n, out);
    case Rule::C: return c_step_checked(n, out);
    default: return t_prime_step_checked(n, out);
  }
}

inline u128 t_step(u128 n) {
  u128 r;
  if (t_step_checked(n, &r)) throw overflow_error();
  return r;
}
inline u128 t_prime_step(u128 n) {
  u128 r;
  if (t_prime_step_checked(n, &r)) throw overflow_error();
  return r;
}
inline u128 c_step(u128 n) {
  u128 r;
  if (c_step_checked(n, &r)) throw overflow_error();
  return r;
}

// ----- powers of three ------------------------------------------------

// 3^80 ~ 2^126.8 is the largest power below 2^127; anything needing a
// bigger exponent must go through the arbitrary-precision fallback.
struct Pow3Table {
  static constexpr u32 max_f = 80;
  u128 p[max_f + 1];
  constexpr Pow3Table() : p{} {
    p[0] = 1;
    for (u32 i = 1; i <= max_f; i++) p[i] = p[i - 1] * 3;
  }
  constexpr u128 operator[](u32 f) const {
    assert(f <= max_f);
    return p[f];
  }
};

inline constexpr Pow3Table pow3{};

// ----- multi-step iteration -------------------------------------------

struct IterResult {
  u128 value = 0;
  u32 odd_steps = 0;
  bool overflow = false;
};

inline IterResult iterate(u128 n, u32 k, Rule rule) {
  IterResult r;
  r.value = n;
  for (u32 i = 0; i < k; i++) {
    r.odd_steps += (u32)(r.value & 1);
    if (step_checked(r.value, rule, &r.value)) {
      r.overflow = true;
      return r;
    }
  }
  return r;
}

// ----- parity patterns -------------------------------------------------

// Bit j holds the parity of the value the (j+1)-th step is applied to,
// i.e. bit j = T^j(n) mod 2. Only the low k bits of n matter, so the
// pattern is computed on n mod 2^k and can never overflow for k <= 64.
struct ParityPattern {
  u64 bits = 0;
  u32 len = 0;

  bool odd_at(u32 j) const { return (bits >> j) & 1; }
  u32 odd_count() const {
    return (u32)__builtin_popcountll(len >= 64 ? bits : bits & (((u64)1 << len) - 1));
  }
};

inline ParityPattern parity_pattern(u128 n, u32 k, Rule rule) {
  assert(k <= 64);
  u128 v = n & ((((u128)1) << k) - 1);
  ParityPattern pat;
  pat.len = k;
  for (u32 j = 0; j < k; j++) {
    u32 odd = (u32)(v & 1);
    pat.bits |= (u64)odd << j;
    if (step_checked(v, rule, &v)) assert(false && "parity pattern cannot overflow");
  }
  return pat;
}

// ----- jump tables ----------------------------------------------------

// One table entry per residue j < 2^k: the value T^k(j) and the number of
// odd steps taken, packed as (f << 27) | value. For k <= 16 the value is
// below 2^26, so 27 bits are enough and an entry fits in 32 bits.
struct JumpTable {
  static constexpr u32 value_bits = 27;
  u32 k = 0;
  Rule rule = Rule::T;
  std::vector<u32> packed;

  u32 value_of(u32 j) const { return packed[j] & (((u32)1 << value_bits) - 1); }
  u32 f_of(u32 j) const { return packed[j] >> value_bits; }
};

inline JumpTable build_jump_table(u32 k, Rule rule = Rule::T) {
  assert(k >= 1 && k <= 16);
  assert(rule != Rule::C);  // jumps rely on the T/T' composition law
  JumpTable tbl;
  tbl.k = k;
  tbl.rule = rule;
  tbl.packed.resize((size_t)1 << k);
  for (u64 j = 0; j < ((u64)1 << k); j++) {
    u64 v = j;
    u32 f = 0;
    for (u32 s = 0; s < k; s++) {
      if (v & 1) {
        f++;
        v = (rule == Rule::T) ? (3 * v + 1) / 2 : (3 * v - 1) / 2;
      } else {
        v >>= 1;
      }
    }
    assert(v < ((u64)1 << JumpTable::value_bits));
    tbl.packed[(size_t)j] = ((u32)f << JumpTable::value_bits) | (u32)v;
  }
  return tbl;
}

struct JumpResult {
  u128 value = 0;
  u32 odd_steps = 0;
  bool overflow = false;
};

// T^k(n) in one lookup: n = j + a*2^k gives T^k(n) = T^k(j) + 3^f(j) * a.
inline JumpResult jump(u128 n, const JumpTable& tbl) {
  u32 j = (u32)(n & (((u64)1 << tbl.k) - 1));
  u128 a = n >> tbl.k;
  JumpResult r;
  r.odd_steps = tbl.f_of(j);
  u128 scaled;
  if (checked_mul(pow3[r.odd_steps], a, &scaled) ||
      checked_add(scaled, tbl.value_of(j), &r.value)) {
    r.overflow = true;
  }
  return r;
}

// ----- parity pattern -> starting value --------------------------------

// For every word t of M parities there is exactly one n < 2^M whose first
// M steps realize it. Built bit by bit: at depth j the two candidate
// extensions differ by 3^f at step j, an odd number, so exactly one of
// them matches the wanted parity.
inline u64 pattern_to_n(const ParityPattern& pat, Rule rule = Rule::T) {
  assert(pat.len <= 64);
  u64 n = 0;
  u128 m = 0;
  u32 f = 0;
  for (u32 j = 0; j < pat.len; j++) {
    bool want = pat.odd_at(j);
    if ((bool)(m & 1) != want) {
      n |= (u64)1 << j;
      m += pow3[f];
    }
    assert((bool)(m & 1) == want);
    if (step_checked(m, rule, &m)) assert(false && "bounded by 3^64 * 2^64");
    f += (u32)want;
  }
  return n;
}

}  // namespace collatz
