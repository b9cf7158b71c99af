#pragma once

// Window-stage precomputation. One SieveVector per odd-count f = f_min + i
// holds, for every residue class mod 2^B, whether the descent budget over
// the next B steps can reach the threshold 485 f - 306 (N - A); bits that
// cannot stay set ("must check"). Bit a corresponds to the residue
// a * 3^f mod 2^B, so the 2^A members of one prefix window sit at adjacent
// indices and are tested with a single shifted load. The mod-9 stage is a
// set of nine short vectors, one per residue of n0, marking which window
// offsets land on an allowed residue.

#include <array>
#include <bit>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "dip.hpp"
#include "sieves.hpp"

namespace collatz {

// ----- packed bits --------------------------------------------------------

struct BitVec {
  u64 nbits = 0;
  std::vector<u64> words;

  void resize_bits(u64 n) {
    nbits = n;
    words.assign((size_t)((n + 63) / 64), 0);
  }
  bool get(u64 i) const { return (words[(size_t)(i >> 6)] >> (i & 63)) & 1; }
  void set(u64 i) { words[(size_t)(i >> 6)] |= (u64)1 << (i & 63); }

  u64 popcount() const {
    u64 c = 0;
    for (u64 w : words) c += (u64)std::popcount(w);
    return c;
  }

  // width <= 64 bits starting at `start`, wrapping mod nbits. Requires the
  // vector to be a whole number of words (nbits % 64 == 0).
  u64 window(u64 start, u32 width) const {
    assert(width >= 1 && width <= 64 && (nbits & 63) == 0 && start < nbits);
    const u64 nw = words.size();
    const u64 w0 = start >> 6;
    const u32 off = (u32)(start & 63);
    u64 out = words[(size_t)w0] >> off;
    if (off) out |= words[(size_t)((w0 + 1) % nw)] << (64 - off);
    if (width == 64) return out;
    return out & (((u64)1 << width) - 1);
  }

  bool operator==(const BitVec&) const = default;
};

// Truncated decimal density, matching the published tables' convention of
// keeping ten digits without rounding.
inline std::string density_string(u64 set_bits, u64 total_bits) {
  u128 scaled = (u128)set_bits * (u128)10000000000ULL / total_bits;
  char buf[32];
  std::snprintf(buf, sizeof buf, "0.%010llu", (unsigned long long)scaled);
  return buf;
}

// ----- sieve vectors ------------------------------------------------------

struct SieveVector {
  u32 N = 0, A = 0, B = 0;
  u32 i = 0;       // vector index, f = f_min(N - A) + i
  u32 f = 0;
  i64 threshold = 0;
  Mode mode = Mode::positive;
  BitVec bits;
};

inline u64 pow3_mod(u32 f, u32 B) {
  const u64 mask = (B >= 64) ? ~(u64)0 : (((u64)1 << B) - 1);
  u64 r = 1;
  for (u32 j = 0; j < f; j++) r = (r * 3) & mask;
  return r;
}

inline SieveVector build_bv(u32 N, u32 A, u32 B, u32 i, Mode mode,
                            MergeTermRule merge_rule = MergeTermRule::require_odd_step,
                            RunTermRule run_rule = RunTermRule::seal_early,
                            u32 threads = 0) {
  assert(N > A && B >= A && B <= 28);
  SieveVector v;
  v.N = N;
  v.A = A;
  v.B = B;
  v.i = i;
  v.f = f_min(N - A) + i;
  v.threshold = bv_threshold(N - A, v.f);
  v.mode = mode;
  assert(v.threshold > 0);
  v.bits.resize_bits((u64)1 << B);

  const u64 mask = ((u64)1 << B) - 1;
  const u64 p3 = pow3_mod(v.f, B);
  const Rule rule = rule_for(mode);

  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  // Word-aligned chunks: each worker owns a disjoint span of output words,
  // so the result is identical for any worker count.
  const u64 total = (u64)1 << B;
  const u64 chunk = ((total / threads + 63) / 64) * 64;

  auto fill = [&](u64 lo, u64 hi) {
    u64 m = (lo * p3) & mask;
    for (u64 a = lo; a < hi; a++) {
      if (dip_full(m, B, rule, merge_rule, run_rule) < v.threshold) v.bits.set(a);
      m = (m + p3) & mask;
    }
  };

  if (threads == 1 || chunk >= total) {
    fill(0, total);
    return v;
  }
  std::vector<std::thread> pool;
  for (u64 lo = 0; lo < total; lo += chunk)
    pool.emplace_back(fill, lo, std::min(lo + chunk, total));
  for (auto& t : pool) t.join();
  return v;
}

// ----- mod 9 vectors ------------------------------------------------------

struct Mod9Vectors {
  u32 N = 0, A = 0;
  u32 multiplier = 0;  // 2^(N-A) mod 9
  Mode mode = Mode::positive;
  std::array<BitVec, 9> vec;

  // Whole vector as one word, for the A <= 6 fast path.
  u64 mask64(u32 r) const {
    assert(A <= 6);
    return vec[r].words[0];
  }
};

inline u32 pow2_mod9(u32 e) {
  u32 r = 1;
  for (u32 j = 0; j < e % 6; j++) r = (r * 2) % 9;  // 2^6 = 64 = 1 mod 9
  return r;
}

inline Mod9Vectors build_mod9(u32 N, u32 A, Mode mode) {
  assert(N > A && A >= 1 && A <= 16);
  Mod9Vectors m9;
  m9.N = N;
  m9.A = A;
  m9.multiplier = pow2_mod9(N - A);
  m9.mode = mode;
  for (u32 r = 0; r < 9; r++) {
    m9.vec[r].resize_bits((u64)1 << A);
    u32 res = r;
    for (u64 a = 0; a < ((u64)1 << A); a++) {
      if (mod9_allows(res, mode)) m9.vec[r].set(a);
      res = (res + m9.multiplier) % 9;
    }
  }
  return m9;
}

// ----- disk cache ---------------------------------------------------------

enum class CacheStatus : u8 {
  ok,
  io_error,          // cannot open / read / write
  corrupt_header,    // bad magic or nonsense fields
  version_mismatch,  // produced by another format revision
  length_mismatch,   // payload shorter or longer than the header promises
  param_mismatch,    // valid file for different (N, A, B, i, mode)
};

inline const char* cache_status_name(CacheStatus s) {
  switch (s) {
    case CacheStatus::ok: return "ok";
    case CacheStatus::io_error: return "io error";
    case CacheStatus::corrupt_header: return "corrupt header";
    case CacheStatus::version_mismatch: return "version mismatch";
    case CacheStatus::length_mismatch: return "length mismatch";
    default: return "parameter mismatch";
  }
}

constexpr char kCacheMagic[8] = {'C', 'Z', 'B', 'I', 'T', 'V', 'E', 'C'};
constexpr u32 kCacheVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, u32 v) {
  u8 b[4] = {(u8)v, (u8)(v >> 8), (u8)(v >> 16), (u8)(v >> 24)};
  os.write((const char*)b, 4);
}
inline void put_u64(std::ostream& os, u64 v) {
  u8 b[8];
  for (int j = 0; j < 8; j++) b[j] = (u8)(v >> (8 * j));
  os.write((const char*)b, 8);
}
inline bool get_u32(std::istream& is, u32* v) {
  u8 b[4];
  if (!is.read((char*)b, 4)) return false;
  *v = (u32)b[0] | ((u32)b[1] << 8) | ((u32)b[2] << 16) | ((u32)b[3] << 24);
  return true;
}
inline bool get_u64(std::istream& is, u64* v) {
  u8 b[8];
  if (!is.read((char*)b, 8)) return false;
  *v = 0;
  for (int j = 7; j >= 0; j--) *v = (*v << 8) | b[j];
  return true;
}

inline void put_words(std::ostream& os, const BitVec& bv) {
  for (u64 w : bv.words) put_u64(os, w);
}
inline bool get_words(std::istream& is, BitVec* bv) {
  for (u64& w : bv->words)
    if (!get_u64(is, &w)) return false;
  return true;
}

// Shared header: magic, version, kind, then the identifying parameters.
struct CacheHeader {
  u32 kind = 0;  // 0 = sieve vector, 1 = mod-9 set
  u32 mode = 0;
  u32 N = 0, A = 0, B = 0, i = 0, f = 0;
  i64 threshold = 0;
  u64 nbits = 0;
  u64 popcount = 0;
};

inline void put_header(std::ostream& os, const CacheHeader& h) {
  os.write(kCacheMagic, 8);
  put_u32(os, kCacheVersion);
  put_u32(os, h.kind);
  put_u32(os, h.mode);
  put_u32(os, h.N);
  put_u32(os, h.A);
  put_u32(os, h.B);
  put_u32(os, h.i);
  put_u32(os, h.f);
  put_u64(os, (u64)h.threshold);
  put_u64(os, h.nbits);
  put_u64(os, h.popcount);
}

inline CacheStatus get_header(std::istream& is, CacheHeader* h) {
  char magic[8];
  if (!is.read(magic, 8)) return CacheStatus::length_mismatch;
  for (int j = 0; j < 8; j++)
    if (magic[j] != kCacheMagic[j]) return CacheStatus::corrupt_header;
  u32 version;
  if (!get_u32(is, &version)) return CacheStatus::length_mismatch;
  if (version != kCacheVersion) return CacheStatus::version_mismatch;
  u64 thr;
  if (!get_u32(is, &h->kind) || !get_u32(is, &h->mode) || !get_u32(is, &h->N) ||
      !get_u32(is, &h->A) || !get_u32(is, &h->B) || !get_u32(is, &h->i) ||
      !get_u32(is, &h->f) || !get_u64(is, &thr) || !get_u64(is, &h->nbits) ||
      !get_u64(is, &h->popcount))
    return CacheStatus::length_mismatch;
  h->threshold = (i64)thr;
  if (h->kind > 1 || h->mode > 1 || h->nbits == 0 || h->nbits > ((u64)1 << 28))
    return CacheStatus::corrupt_header;
  return CacheStatus::ok;
}

}  // namespace detail

inline std::string bv_cache_name(u32 N, u32 A, u32 B, u32 i, Mode mode) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%sbv_N%u_A%u_B%u_i%u.bits",
                mode == Mode::negative ? "neg_" : "", N, A, B, i);
  return buf;
}

inline std::string mod9_cache_name(u32 N, u32 A, Mode mode) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%smod9_N%u_A%u.bits",
                mode == Mode::negative ? "neg_" : "", N, A);
  return buf;
}

inline CacheStatus save_sieve_vector(const std::string& path, const SieveVector& v) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) return CacheStatus::io_error;
  detail::CacheHeader h;
  h.kind = 0;
  h.mode = (u32)v.mode;
  h.N = v.N;
  h.A = v.A;
  h.B = v.B;
  h.i = v.i;
  h.f = v.f;
  h.threshold = v.threshold;
  h.nbits = v.bits.nbits;
  h.popcount = v.bits.popcount();
  detail::put_header(os, h);
  detail::put_words(os, v.bits);
  os.flush();
  return os ? CacheStatus::ok : CacheStatus::io_error;
}

inline CacheStatus load_sieve_vector(const std::string& path, u32 N, u32 A, u32 B,
                                     u32 i, Mode mode, SieveVector* out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return CacheStatus::io_error;
  detail::CacheHeader h;
  CacheStatus st = detail::get_header(is, &h);
  if (st != CacheStatus::ok) return st;
  if (h.kind != 0 || h.mode != (u32)mode || h.N != N || h.A != A || h.B != B ||
      h.i != i)
    return CacheStatus::param_mismatch;
  if (h.nbits != ((u64)1 << B)) return CacheStatus::corrupt_header;
  out->N = N;
  out->A = A;
  out->B = B;
  out->i = i;
  out->f = h.f;
  out->threshold = h.threshold;
  out->mode = mode;
  out->bits.resize_bits(h.nbits);
  if (!detail::get_words(is, &out->bits)) return CacheStatus::length_mismatch;
  is.peek();
  if (!is.eof()) return CacheStatus::length_mismatch;
  if (out->bits.popcount() != h.popcount) return CacheStatus::corrupt_header;
  if (out->f != f_min(N - A) + i || out->threshold != bv_threshold(N - A, out->f))
    return CacheStatus::corrupt_header;
  return CacheStatus::ok;
}

inline CacheStatus save_mod9(const std::string& path, const Mod9Vectors& m9) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) return CacheStatus::io_error;
  detail::CacheHeader h;
  h.kind = 1;
  h.mode = (u32)m9.mode;
  h.N = m9.N;
  h.A = m9.A;
  h.B = m9.A;
  h.i = 0;
  h.f = 0;
  h.nbits = (u64)1 << m9.A;
  u64 pc = 0;
  for (const auto& v : m9.vec) pc += v.popcount();
  h.popcount = pc;
  detail::put_header(os, h);
  for (const auto& v : m9.vec) detail::put_words(os, v);
  os.flush();
  return os ? CacheStatus::ok : CacheStatus::io_error;
}

inline CacheStatus load_mod9(const std::string& path, u32 N, u32 A, Mode mode,
                             Mod9Vectors* out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return CacheStatus::io_error;
  detail::CacheHeader h;
  CacheStatus st = detail::get_header(is, &h);
  if (st != CacheStatus::ok) return st;
  if (h.kind != 1 || h.mode != (u32)mode || h.N != N || h.A != A)
    return CacheStatus::param_mismatch;
  if (h.nbits != ((u64)1 << A)) return CacheStatus::corrupt_header;
  out->N = N;
  out->A = A;
  out->multiplier = pow2_mod9(N - A);
  out->mode = mode;
  u64 pc = 0;
  for (auto& v : out->vec) {
    v.resize_bits(h.nbits);
    if (!detail::get_words(is, &v)) return CacheStatus::length_mismatch;
    pc += v.popcount();
  }
  is.peek();
  if (!is.eof()) return CacheStatus::length_mismatch;
  if (pc != h.popcount) return CacheStatus::corrupt_header;
  return CacheStatus::ok;
}

}  // namespace collatz
