#pragma once

// Depth-first expansion of residue classes mod 2^k. A node (n0, m, k, f)
// stands for every n = n0 (mod 2^k): all of them share their first k step
// parities, reach m + 3^f * (n - n0) / 2^k after k steps, and split into
// two children mod 2^(k+1):
//
//   m even:  (n0, m/2, k+1, f)          (n0 + 2^k, (3(m + 3^f) + 1)/2, k+1, f+1)
//   m odd:   (n0, (3m+1)/2, k+1, f+1)   (n0 + 2^k, (m + 3^f)/2,        k+1, f)
//
// (odd branches use (3x-1)/2 in negative mode). Classes killed by a sieve
// are dropped with their whole subtree; survivors at depth M are emitted as
// records for the per-candidate window stage.

#include <istream>
#include <ostream>

#include "sieves.hpp"

namespace collatz {

struct SearchNode {
  u128 n0 = 0;
  u128 m = 0;
  u32 k = 0;
  u32 f = 0;
  SieveState st;
};

struct PrefixRecord {
  u128 n0 = 0;
  u128 m = 0;
  u16 f = 0;
};

struct PrefixStats {
  u64 descent = 0;
  u64 path_merge = 0;
  u64 oee = 0;
  u64 records = 0;
  u64 below_f_min = 0;  // records whose f undercuts the depth-M budget bound
  u64 nodes = 0;

  void merge(const PrefixStats& o) {
    descent += o.descent;
    path_merge += o.path_merge;
    oee += o.oee;
    records += o.records;
    below_f_min += o.below_f_min;
    nodes += o.nodes;
  }
};

// Depth-2 root. Classes 0 and 2 mod 4 halve below themselves immediately.
// Positive: 4t+1 -> 3t+1 < 4t+1 within two steps for t >= 1, so only
// 3 mod 4 survives (n = 1 sits in the terminal cycle and is swept by the
// explicit base range). Negative: 4t+3 -> 3t+2 in two steps, so only
// 1 mod 4 survives (n = 1 is T'-fixed, again covered by the base range).
inline SearchNode search_root(Mode mode) {
  SearchNode nd;
  nd.n0 = (mode == Mode::positive) ? 3 : 1;
  nd.m = nd.n0;
  for (u32 depth = 0; depth < 2; depth++) {
    bool odd = (nd.m & 1) != 0;
    sieve_state_advance(nd.st, odd, nd.m, depth, nd.f, mode);
    u128 next;
    bool ovf = step_checked(nd.m, rule_for(mode), &next);
    assert(!ovf && odd);
    (void)ovf;
    nd.m = next;
    nd.f += 1;
  }
  nd.k = 2;
  return nd;
}

struct ChildPair {
  SearchNode lo, hi;
};

// Returns false if 128-bit arithmetic would overflow (caller aborts).
inline bool expand_node(const SearchNode& nd, Mode mode, ChildPair* out) {
  if (nd.f > Pow3Table::max_f) return false;
  const u128 p3 = pow3[nd.f];
  const bool m_odd = (nd.m & 1) != 0;
  const Rule rule = rule_for(mode);

  u128 hi_value;  // value of the high sibling at depth k: m + 3^f
  if (checked_add(nd.m, p3, &hi_value)) return false;

  SearchNode lo = nd, hi = nd;
  lo.k = hi.k = nd.k + 1;
  hi.n0 = nd.n0 + ((u128)1 << nd.k);

  if (step_checked(nd.m, rule, &lo.m)) return false;
  if (step_checked(hi_value, rule, &hi.m)) return false;
  lo.f += (u32)m_odd;
  hi.f += (u32)!m_odd;

  sieve_state_advance(lo.st, m_odd, nd.m, nd.k, nd.f, mode);
  if (!sieve_state_bump_candidate(hi.st, nd.k)) return false;
  sieve_state_advance(hi.st, !m_odd, hi_value, nd.k, nd.f, mode);

  out->lo = lo;
  out->hi = hi;
  return true;
}

inline Exclusion classify_node(const SearchNode& nd, Mode mode) {
  if (descent_excludes(nd.n0, nd.m, nd.k, nd.f, mode)) return Exclusion::descent;
  if (path_merge_excludes(nd.st, nd.n0, nd.m, nd.k, nd.f, mode))
    return Exclusion::path_merge;
  if (oee_excludes(nd.st, nd.n0, mode)) return Exclusion::oee;
  return Exclusion::none;
}

// Core walk: expands `root` down to depth `limit`, feeding surviving
// depth-`limit` nodes to `emit` and excluded nodes to `excluded`. The
// low-bit child is expanded first, so emission order is deterministic and
// increases by the bit-reversed prefix. Returns false on overflow with the
// offending node in *bad.
template <typename NodeSink, typename ExclusionSink>
bool walk_prefixes(const SearchNode& root, u32 limit, Mode mode, PrefixStats& stats,
                   NodeSink&& emit, ExclusionSink&& excluded, SearchNode* bad) {
  assert(root.k <= limit);
  std::vector<SearchNode> stack;
  stack.reserve(2 * (limit - root.k) + 4);
  stack.push_back(root);
  while (!stack.empty()) {
    SearchNode nd = stack.back();
    stack.pop_back();
    stats.nodes++;

    Exclusion why = classify_node(nd, mode);
    if (why != Exclusion::none) {
      switch (why) {
        case Exclusion::descent: stats.descent++; break;
        case Exclusion::path_merge: stats.path_merge++; break;
        default: stats.oee++; break;
      }
      excluded(nd, why);
      continue;
    }
    if (nd.k == limit) {
      emit(nd);
      continue;
    }
    ChildPair ch;
    if (!expand_node(nd, mode, &ch)) {
      if (bad) *bad = nd;
      return false;
    }
    stack.push_back(ch.hi);
    stack.push_back(ch.lo);
  }
  return true;
}

inline void no_exclusion_sink(const SearchNode&, Exclusion) {}

// Emit all depth-M survivor records below `root`.
template <typename RecordSink>
bool run_subtree(const SearchNode& root, u32 M, Mode mode, PrefixStats& stats,
                 RecordSink&& sink, SearchNode* bad = nullptr) {
  const u32 fmin = f_min(M);
  return walk_prefixes(
      root, M, mode, stats,
      [&](const SearchNode& nd) {
        stats.records++;
        if (nd.f < fmin) stats.below_f_min++;
        sink(PrefixRecord{nd.n0, nd.m, (u16)nd.f});
      },
      no_exclusion_sink, bad);
}

template <typename RecordSink>
bool run_prefix_search(u32 M, Mode mode, PrefixStats& stats, RecordSink&& sink,
                       SearchNode* bad = nullptr) {
  assert(M > 2 && M <= 120);
  return run_subtree(search_root(mode), M, mode, stats, sink, bad);
}

// ----- sharding ---------------------------------------------------------

// Survivor nodes at a fixed depth, in emission order. Each one is an
// independent search root carrying its full sieve state.
struct SplitSpec {
  u32 depth = 0;
  std::vector<SearchNode> roots;
};

inline SplitSpec enumerate_split(u32 split_depth, Mode mode) {
  assert(split_depth >= 2 && split_depth <= 120);
  SplitSpec spec;
  spec.depth = split_depth;
  PrefixStats ignored;
  bool ok = walk_prefixes(
      search_root(mode), split_depth, mode, ignored,
      [&](const SearchNode& nd) { spec.roots.push_back(nd); },
      no_exclusion_sink, nullptr);
  assert(ok);
  (void)ok;
  return spec;
}

// Round-robin selection: shard j of c takes roots j, j+c, j+2c, ...
inline std::vector<SearchNode> shard_roots(const SplitSpec& spec, u32 index, u32 count) {
  assert(count >= 1 && index < count);
  std::vector<SearchNode> out;
  for (size_t i = index; i < spec.roots.size(); i += count) out.push_back(spec.roots[i]);
  return out;
}

// ----- record stream ----------------------------------------------------

// Fixed 34-byte little-endian wire format: n0 (16 bytes), m (16 bytes),
// f (2 bytes).
inline void write_prefix_record(std::ostream& os, const PrefixRecord& r) {
  u8 buf[34];
  for (int i = 0; i < 16; i++) buf[i] = (u8)(r.n0 >> (8 * i));
  for (int i = 0; i < 16; i++) buf[16 + i] = (u8)(r.m >> (8 * i));
  buf[32] = (u8)r.f;
  buf[33] = (u8)(r.f >> 8);
  os.write((const char*)buf, sizeof buf);
}

inline bool read_prefix_record(std::istream& is, PrefixRecord* r) {
  u8 buf[34];
  if (!is.read((char*)buf, sizeof buf)) return false;
  r->n0 = 0;
  r->m = 0;
  for (int i = 15; i >= 0; i--) r->n0 = (r->n0 << 8) | buf[i];
  for (int i = 15; i >= 0; i--) r->m = (r->m << 8) | buf[16 + i];
  r->f = (u16)(buf[32] | ((u16)buf[33] << 8));
  return true;
}

}  // namespace collatz
