#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "collatz/sieves.hpp"

using namespace collatz;

// Walk k steps from n, keeping the sieve state in sync the way the prefix
// search does: state advanced with the parity of the value being stepped.
static SieveState walk_state(u128 n, u32 k, Mode mode, u128* out_m, u32* out_f) {
  const Rule rule = rule_for(mode);
  SieveState st;
  u128 v = n;
  u32 f = 0;
  for (u32 j = 0; j < k; j++) {
    bool odd = (v & 1) != 0;
    sieve_state_advance(st, odd, v, j, f, mode);
    f += (u32)odd;
    u128 next;
    REQUIRE_FALSE(step_checked(v, rule, &next));
    v = next;
  }
  if (out_m) *out_m = v;
  if (out_f) *out_f = f;
  return st;
}

TEST_CASE("descent verdicts") {
  CHECK(descent_excludes(2, 1, 1, 0, Mode::positive));
  CHECK_FALSE(descent_excludes(3, 4, 3, 2, Mode::positive));  // T^3(3) = 4
  CHECK(descent_excludes(3, 2, 4, 2, Mode::positive));        // T^4(3) = 2
  // negative mode uses the budget, not the value
  CHECK(descent_excludes(1, 100, 306, 485, Mode::negative) ==
        (306 * 306 - 485 * 485 >= 0));
  CHECK(descent_excludes(9, 5, 7, 4, Mode::negative));  // 306*7 >= 485*4
}

TEST_CASE("descent monotonicity across a class") {
  std::mt19937_64 rng(31);
  int hits = 0;
  while (hits < 10000) {
    u32 k = 2 + (u32)(rng() % 30);
    u128 n0 = rng() & ((((u64)1 << k) - 1));
    if (n0 == 0) continue;
    IterResult r = iterate(n0, k, Rule::T);
    if (r.value >= n0) continue;
    hits++;
    u128 a = 1 + (rng() & 0xffffff);
    u128 n = n0 + (a << k);
    REQUIRE(iterate(n, k, Rule::T).value < n);
  }
}

TEST_CASE("path merge on the 15 and 79 prefixes") {
  u128 m = 0;
  u32 f = 0;
  SieveState st = walk_state(15, 6, Mode::positive, &m, &f);
  REQUIRE(m == 20);  // 15,23,35,53,80,40 -> 20
  CHECK(st.has_odd());
  CHECK(st.trailing_evens == 2);
  CHECK(path_merge_excludes(st, 15, m, 6, f, Mode::positive));  // target 13

  st = walk_state(79, 6, Mode::positive, &m, &f);
  REQUIRE(m == 101);
  CHECK(path_merge_excludes(st, 79, m, 6, f, Mode::positive));  // target 67

  st = walk_state(3, 3, Mode::positive, &m, &f);
  REQUIRE(m == 4);  // 4 = 1 mod 3: one trailing even
  CHECK_FALSE(path_merge_excludes(st, 3, m, 3, f, Mode::positive));
}

TEST_CASE("trailing-evens parity pins the residue mod 3") {
  std::mt19937_64 rng(32);
  int odd_seen = 0;
  for (int s = 0; s < 100000; s++) {
    u32 k = 1 + (u32)(rng() % 40);
    u128 n = (rng() & (((u64)1 << 50) - 1)) + 1;
    u128 m = 0;
    u32 f = 0;
    SieveState st = walk_state(n, k, Mode::positive, &m, &f);
    if (!st.has_odd()) continue;
    odd_seen++;
    REQUIRE(((st.trailing_evens & 1) == 0) == (m % 3 == 2));
  }
  REQUIRE(odd_seen > 50000);
}

TEST_CASE("merge targets are exact preimages") {
  std::mt19937_64 rng(33);
  int fired = 0;
  while (fired < 10000) {
    u32 k = 1 + (u32)(rng() % 40);
    u128 n = (rng() & (((u64)1 << 40) - 1)) + 2;
    u128 m = 0;
    u32 f = 0;
    SieveState st = walk_state(n, k, Mode::positive, &m, &f);
    if (!st.has_odd() || (st.trailing_evens & 1)) continue;
    fired++;
    REQUIRE(m % 3 == 2);
    u128 u = (2 * m - 1) / 3;
    REQUIRE(t_step(u) == m);
    // mirrored target under T'
    SieveState stn = walk_state(n, k, Mode::negative, &m, &f);
    if (stn.has_odd() && (stn.trailing_evens & 1) == 0) {
      REQUIRE(m % 3 == 1);
      REQUIRE(t_prime_step((2 * m + 1) / 3) == m);
    }
  }
}

TEST_CASE("mod 9 residues") {
  for (u32 r = 0; r < 9; r++) {
    bool pos = !(r == 2 || r == 4 || r == 5 || r == 8);
    bool neg = !(r == 1 || r == 4 || r == 5 || r == 7);
    CHECK(mod9_allows(r, Mode::positive) == pos);
    CHECK(mod9_allows(r, Mode::negative) == neg);
  }
  CHECK(std::popcount((u32)mod9_allowed_mask(Mode::positive)) == 5);
  CHECK(std::popcount((u32)mod9_allowed_mask(Mode::negative)) == 5);
}

TEST_CASE("mod 9 preimage identities") {
  std::mt19937_64 rng(34);
  for (int s = 0; s < 10000; s++) {
    u128 n = (rng() & (((u64)1 << 50) - 1)) + 10;
    u32 r = (u32)(n % 9);
    if (r % 3 == 2) {
      u128 p = (2 * n - 1) / 3;
      REQUIRE(t_step(p) == n);
      REQUIRE(p < n);
    }
    if (r == 4) {
      u128 p = (8 * n - 5) / 9;
      REQUIRE(iterate(p, 3, Rule::T).value == n);
      REQUIRE(p < n);
    }
    if (r % 3 == 1) {
      u128 p = (2 * n + 1) / 3;
      REQUIRE(t_prime_step(p) == n);
      REQUIRE(p < n);
    }
    if (r == 5) {
      u128 p = (8 * n + 5) / 9;
      REQUIRE(iterate(p, 3, Rule::TPrime).value == n);
      REQUIRE(p < n);
    }
  }
}

TEST_CASE("state machine transitions") {
  SieveState st;
  CHECK_FALSE(st.has_odd());
  sieve_state_advance(st, false, 8, 0, 0, Mode::positive);
  CHECK_FALSE(st.has_odd());  // still no odd step seen
  sieve_state_advance(st, true, 27, 1, 0, Mode::positive);
  CHECK(st.has_odd());
  CHECK(st.trailing_evens == 0);
  CHECK(st.oee_candidate == 13);  // (27 - 1) / 2
  CHECK(st.oee_alive);
  sieve_state_advance(st, true, 41, 2, 1, Mode::positive);
  CHECK(st.oee_candidate == 13);  // same run, candidate unchanged
  sieve_state_advance(st, false, 62, 3, 2, Mode::positive);
  CHECK_FALSE(st.oee_fired);
  CHECK(st.trailing_evens == 1);
  sieve_state_advance(st, false, 31, 4, 2, Mode::positive);
  CHECK(st.oee_fired);  // second even seals the run
  CHECK(st.trailing_evens == 2);
  CHECK(oee_excludes(st, 100, Mode::positive));       // 13 < 100
  CHECK_FALSE(oee_excludes(st, 13, Mode::positive));  // not below n0
  sieve_state_advance(st, false, 15, 5, 2, Mode::positive);
  CHECK_FALSE(st.oee_fired);  // fires only at the sealing moment
  CHECK(st.trailing_evens == 3);

  // a run cut short by just one even then an odd discards nothing early,
  // but the next odd opens a fresh run with a fresh candidate
  SieveState s2;
  sieve_state_advance(s2, true, 9, 0, 0, Mode::positive);
  sieve_state_advance(s2, false, 14, 1, 1, Mode::positive);
  sieve_state_advance(s2, true, 7, 2, 1, Mode::positive);
  CHECK(s2.oee_candidate == 3);  // new run at 7
  CHECK_FALSE(s2.oee_fired);
}

TEST_CASE("sealed runs merge within l + 2 steps") {
  std::mt19937_64 rng(35);
  for (Mode mode : {Mode::positive, Mode::negative}) {
  int fired = 0;
  while (fired < 4000) {
    u32 k = 3 + (u32)(rng() % 30);
    u128 n = (rng() & (((u64)1 << 40) - 1)) + 3;
    const Rule rule = rule_for(mode);
    SieveState st;
    u128 v = n;
    u32 f = 0;
    for (u32 j = 0; j < k; j++) {
      bool odd = (v & 1) != 0;
      sieve_state_advance(st, odd, v, j, f, mode);
      f += (u32)odd;
      v = (rule == Rule::T) ? t_step(v) : t_prime_step(v);
      if (st.oee_fired) {
        fired++;
        // run of l odds sealed by 2 evens: the value here is l + 2 steps
        // past the run start w, and (w -+ 1)/2 reaches it in l + 1 steps
        u128 u = st.oee_candidate;
        u32 steps = j - st.run_start_depth;
        REQUIRE(iterate(u, steps, rule).value == v);
        break;
      }
    }
  }
  }
}

TEST_CASE("candidate bump tracks the sibling split") {
  // T^j(n0 + 2^k) = T^j(n0) + 3^{f_j} 2^{k-j}: after splitting off the
  // sibling at depth k, the stored run-start candidate must describe the
  // sibling's (shifted) trajectory value.
  std::mt19937_64 rng(36);
  int checked = 0;
  while (checked < 4000) {
    u32 k = 4 + (u32)(rng() % 20);
    u64 n0 = rng() & (((u64)1 << k) - 1);
    if (!(n0 & 1)) continue;
    u128 m = 0;
    u32 f = 0;
    SieveState st = walk_state(n0, k, Mode::positive, &m, &f);
    if (!st.oee_alive) continue;
    checked++;
    SieveState bumped = st;
    REQUIRE(sieve_state_bump_candidate(bumped, k));
    u128 sib = (u128)n0 + ((u128)1 << k);
    u32 d = st.run_start_depth;
    u128 w = iterate(sib, d, Rule::T).value;  // sibling's run-start value
    REQUIRE(bumped.oee_candidate == (w - 1) / 2);
  }
}
