#pragma once

// 128-bit unsigned helpers. All arithmetic that can leave the 128-bit range
// goes through the checked_* functions; nothing in this library is allowed
// to wrap silently.

#include <cstdint>
#include <string>
#include <stdexcept>

namespace collatz {

using u8  = uint8_t;
using u16 = uint16_t;
using u32 = uint32_t;
using u64 = uint64_t;
using i64 = int64_t;
using u128 = unsigned __int128;

constexpr u128 U128_MAX = ~(u128)0;

constexpr u128 make_u128(u64 hi, u64 lo) { return ((u128)hi << 64) | lo; }
constexpr u64 lo64(u128 x) { return (u64)x; }
constexpr u64 hi64(u128 x) { return (u64)(x >> 64); }

// Returns true on overflow, mirroring the GCC builtins.
inline bool checked_add(u128 a, u128 b, u128* out) {
  return __builtin_add_overflow(a, b, out);
}
inline bool checked_mul(u128 a, u128 b, u128* out) {
  return __builtin_mul_overflow(a, b, out);
}

struct overflow_error : std::runtime_error {
  overflow_error() : std::runtime_error("128-bit overflow") {}
};

inline u128 add_or_throw(u128 a, u128 b) {
  u128 r;
  if (checked_add(a, b, &r)) throw overflow_error();
  return r;
}
inline u128 mul_or_throw(u128 a, u128 b) {
  u128 r;
  if (checked_mul(a, b, &r)) throw overflow_error();
  return r;
}

inline int bit_width_u128(u128 x) {
  if (x == 0) return 0;
  u64 hi = hi64(x);
  if (hi) return 128 - __builtin_clzll(hi);
  return 64 - __builtin_clzll(lo64(x));
}

inline std::string to_string_u128(u128 x) {
  if (x == 0) return "0";
  char buf[40];
  int i = 40;
  while (x > 0) {
    buf[--i] = (char)('0' + (int)(x % 10));
    x /= 10;
  }
  return std::string(buf + i, buf + 40);
}

inline u128 parse_u128(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty integer literal");
  u128 x = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad digit in integer literal");
    x = mul_or_throw(x, 10);
    x = add_or_throw(x, (u128)(c - '0'));
  }
  return x;
}

// x mod 9 without 128-bit division: 2^64 = 2^(6*10+4) and 2^6 = 64 = 7*9+1,
// so 2^64 = 16 = 7 (mod 9).
inline u32 mod9_u128(u128 x) {
  return (u32)((lo64(x) % 9 + 7 * (hi64(x) % 9)) % 9);
}

}  // namespace collatz
