// Command-line front end: precompute, verify, split, records, oracle,
// bijection. JSON goes to --stats-out / --records-out, human tables to
// stdout. Exit codes: 0 done, 2 bad configuration, 3 cache trouble,
// 4 internal invariant breach.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "collatz/oracle.hpp"
#include "collatz/stats_json.hpp"
#include "collatz/verifier.hpp"

using namespace collatz;

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kCacheError = 3, kInternalError = 4 };

struct Flags {
  u32 n_bits = 0;
  u32 a = 6;
  u32 b = 24;
  u32 bv_count = 8;
  std::string mode = "pos";
  std::string shard = "0/1";
  u32 split_depth = 0;
  u32 threads = 1;
  std::string cache_dir;
  std::string stats_out;
  std::string records_out;
  u64 limit = (u64)1 << 21;
  std::string word;
};

void add_common_flags(CLI::App* cmd, Flags& fl) {
  cmd->add_option("--n-bits", fl.n_bits, "verify every n below 2^N");
  cmd->add_option("--a", fl.a, "window bits, 2^A candidates per class")
      ->default_val(6);
  cmd->add_option("--b", fl.b, "lookahead bits per vector")->default_val(24);
  cmd->add_option("--bv-count", fl.bv_count, "number of lookahead vectors")
      ->default_val(8);
  cmd->add_option("--mode", fl.mode, "pos or neg")
      ->default_val("pos")
      ->check(CLI::IsMember({"pos", "neg", "positive", "negative"}));
  cmd->add_option("--shard", fl.shard, "work unit J/K: roots J, J+K, J+2K, ...")
      ->default_val("0/1");
  cmd->add_option("--split-depth", fl.split_depth,
                  "root enumeration depth (0 = automatic)");
  cmd->add_option("--threads", fl.threads, "worker threads")->default_val(1);
  cmd->add_option("--cache-dir", fl.cache_dir, "vector cache directory");
  cmd->add_option("--stats-out", fl.stats_out, "write JSON stats here (- = stdout)");
  cmd->add_option("--records-out", fl.records_out, "write records here (- = stdout)");
}

// Returns an error message, or fills cfg and returns "".
std::string flags_to_config(const Flags& fl, RunConfig* cfg) {
  cfg->N = fl.n_bits;
  cfg->A = fl.a;
  cfg->B = fl.b;
  cfg->i_max = fl.bv_count;
  cfg->mode = (fl.mode == "neg" || fl.mode == "negative") ? Mode::negative
                                                          : Mode::positive;
  cfg->split_depth = fl.split_depth;
  cfg->threads = fl.threads;
  cfg->cache_dir = fl.cache_dir;
  unsigned j = 0, k = 0;
  if (std::sscanf(fl.shard.c_str(), "%u/%u", &j, &k) != 2)
    return "--shard expects J/K";
  cfg->shard_index = j;
  cfg->shard_count = k;
  return cfg->validate();
}

int write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::fputs(text.c_str(), stdout);
    return kOk;
  }
  std::ofstream os(path, std::ios::trunc);
  os << text;
  os.flush();
  if (!os) {
    std::fprintf(stderr, "cannot write %s\n", path.c_str());
    return kInternalError;
  }
  return kOk;
}

int cmd_precompute(const Flags& fl) {
  RunConfig cfg;
  std::string err = flags_to_config(fl, &cfg);
  if (!err.empty()) {
    std::fprintf(stderr, "configuration: %s\n", err.c_str());
    return kConfigError;
  }
  if (cfg.cache_dir.empty()) cfg.cache_dir = "bvcache";
  std::error_code ec;
  std::filesystem::create_directories(cfg.cache_dir, ec);
  if (ec) {
    std::fprintf(stderr, "cache: cannot create %s: %s\n", cfg.cache_dir.c_str(),
                 ec.message().c_str());
    return kCacheError;
  }

  VectorLoad vl = load_or_build_vectors(cfg);
  if (vl.status != CacheStatus::ok) {
    std::fprintf(stderr, "cache: %s: %s\n", cache_status_name(vl.status),
                 vl.bad_file.c_str());
    return kCacheError;
  }

  const u64 total = (u64)1 << cfg.B;
  for (u32 i = 0; i < cfg.i_max; i++) {
    const SieveVector& v = vl.vs.bvs[i];
    std::printf("BV_%-2u f=%-3u threshold=%-6lld density %s\n", i, v.f,
                (long long)v.threshold,
                density_string(v.bits.popcount(), total).c_str());
  }
  u64 m9bits = 0;
  for (const auto& v : vl.vs.m9.vec) m9bits += v.popcount();
  std::printf("mod9  multiplier=%u set %llu of %llu\n", vl.vs.m9.multiplier,
              (unsigned long long)m9bits,
              (unsigned long long)(9 * ((u64)1 << cfg.A)));
  if (vl.rebuilt == 0)
    std::printf("cache warm: all %u vectors loaded, nothing rebuilt\n",
                cfg.i_max + 1);
  else
    std::printf("built %u of %u vectors into %s\n", vl.rebuilt, cfg.i_max + 1,
                cfg.cache_dir.c_str());
  return kOk;
}

int cmd_verify(const Flags& fl) {
  RunConfig cfg;
  std::string err = flags_to_config(fl, &cfg);
  if (!err.empty()) {
    std::fprintf(stderr, "configuration: %s\n", err.c_str());
    return kConfigError;
  }

  VectorLoad vl = load_or_build_vectors(cfg);
  if (vl.status != CacheStatus::ok) {
    std::fprintf(stderr, "cache: %s: %s\n", cache_status_name(vl.status),
                 vl.bad_file.c_str());
    return kCacheError;
  }

  RunStats st;
  try {
    st = verify_range(cfg, vl.vs);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal: %s\n", e.what());
    return kInternalError;
  }

  std::printf("mode %s, n < 2^%u, shard %u/%u\n", mode_name(cfg.mode), cfg.N,
              cfg.shard_index, cfg.shard_count);
  std::printf("explicitly checked  %llu\n", (unsigned long long)st.explicit_checked);
  std::printf("excluded descent    %llu\n", (unsigned long long)st.descent);
  std::printf("excluded path merge %llu\n", (unsigned long long)st.path_merge);
  std::printf("excluded oee        %llu\n", (unsigned long long)st.oee);
  std::printf("excluded mod 9      %llu\n", (unsigned long long)st.mod9);
  std::printf("excluded lookahead  %llu\n", (unsigned long long)st.bv);
  std::printf("depth-%u survivors  %llu (f below bound %llu, above vectors %llu)\n",
              cfg.M(), (unsigned long long)st.prefix_records,
              (unsigned long long)st.below_f_min,
              (unsigned long long)st.above_i_max);
  std::printf("checksum            %llu %llu %llu\n",
              (unsigned long long)st.checksum_n,
              (unsigned long long)st.checksum_steps,
              (unsigned long long)st.checksum_count);
  std::printf("overflow retries    %llu\n", (unsigned long long)st.overflow_retries);
  std::printf("wall seconds        %.3f\n", st.wall_seconds);

  if (!fl.stats_out.empty())
    return write_text(fl.stats_out, stats_to_json(cfg, st).dump(2) + "\n");
  return kOk;
}

int cmd_split(const Flags& fl) {
  RunConfig cfg;
  std::string err = flags_to_config(fl, &cfg);
  if (!err.empty()) {
    std::fprintf(stderr, "configuration: %s\n", err.c_str());
    return kConfigError;
  }
  const u32 depth = cfg.split_depth ? cfg.split_depth : cfg.auto_split_depth();
  SplitSpec spec = enumerate_split(depth, cfg.mode);
  std::vector<SearchNode> mine = shard_roots(spec, cfg.shard_index, cfg.shard_count);
  std::printf("split depth %u: %zu roots", depth, spec.roots.size());
  if (cfg.shard_count > 1)
    std::printf(", shard %u/%u takes %zu", cfg.shard_index, cfg.shard_count,
                mine.size());
  std::printf("\n");

  if (!fl.records_out.empty()) {
    std::ofstream os(fl.records_out, std::ios::binary | std::ios::trunc);
    if (!os) {
      std::fprintf(stderr, "cannot write %s\n", fl.records_out.c_str());
      return kInternalError;
    }
    for (const SearchNode& nd : mine)
      write_prefix_record(os, PrefixRecord{nd.n0, nd.m, (u16)nd.f});
    os.flush();
    if (!os) return kInternalError;
    std::printf("wrote %zu records to %s\n", mine.size(), fl.records_out.c_str());
  }
  return kOk;
}

int cmd_records(const Flags& fl) {
  const Mode mode = (fl.mode == "neg" || fl.mode == "negative") ? Mode::negative
                                                                : Mode::positive;
  if (fl.limit < 1) {
    std::fprintf(stderr, "configuration: --limit must be at least 1\n");
    return kConfigError;
  }
  std::vector<PathRecord> recs = scan_path_records(fl.limit, mode);

  size_t wn = 1, wt = 1;
  for (const auto& r : recs) {
    wn = std::max(wn, to_string_u128(r.n).size());
    wt = std::max(wt, to_string_u128(r.t).size());
  }
  std::printf("%4s  %*s  %*s  %6s  %s\n", "#", (int)wn, "n", (int)wt, "max",
              "ratio", "comment");
  for (size_t idx = 0; idx < recs.size(); idx++) {
    const auto& r = recs[idx];
    std::printf("%4zu  %*s  %*s  %6s  %s\n", idx + 1, (int)wn,
                to_string_u128(r.n).c_str(), (int)wt, to_string_u128(r.t).c_str(),
                r.n > 1 ? ratio_string(r.ratio).c_str() : "-",
                r.comment.empty() ? "-" : r.comment.c_str());
  }

  if (!fl.records_out.empty()) {
    ordered_json arr = ordered_json::array();
    for (size_t idx = 0; idx < recs.size(); idx++) {
      const auto& r = recs[idx];
      arr.push_back({{"index", idx + 1},
                     {"n", to_string_u128(r.n)},
                     {"max", to_string_u128(r.t)},
                     {"ratio", r.n > 1 ? ratio_string(r.ratio) : ""},
                     {"comment", r.comment}});
    }
    ordered_json doc;
    doc["mode"] = mode_name(mode);
    doc["limit"] = fl.limit;
    doc["records"] = arr;
    return write_text(fl.records_out, doc.dump(2) + "\n");
  }
  return kOk;
}

int cmd_oracle(const Flags& fl) {
  const u32 nbits = fl.n_bits ? fl.n_bits : 20;
  if (nbits < 1 || nbits > 26) {
    std::fprintf(stderr, "configuration: oracle range is n-bits in [1, 26]\n");
    return kConfigError;
  }
  const Mode mode = (fl.mode == "neg" || fl.mode == "negative") ? Mode::negative
                                                                : Mode::positive;
  ExhaustiveReport rep = exhaustive_verify(nbits, mode);
  std::printf("mode %s, every n < 2^%u: %llu verdicts\n", mode_name(mode), nbits,
              (unsigned long long)rep.total);
  std::printf("  brute base       %llu\n", (unsigned long long)rep.bootstrap_checked);
  std::printf("  implicit classes %llu\n", (unsigned long long)rep.implicit_excluded);
  std::printf("  sieve classes    %llu\n", (unsigned long long)rep.sieve_excluded);
  std::printf("  mod 9 window     %llu\n", (unsigned long long)rep.mod9_excluded);
  std::printf("  lookahead window %llu\n", (unsigned long long)rep.bv_excluded);
  std::printf("  explicit checks  %llu\n", (unsigned long long)rep.explicit_checked);
  std::printf("%llu certificate failures, %llu mismatches\n",
              (unsigned long long)rep.cert_failures,
              (unsigned long long)rep.mismatches);
  return rep.ok() ? kOk : kInternalError;
}

int cmd_bijection(const Flags& fl) {
  if (fl.word.empty() || fl.word.size() > 64) {
    std::fprintf(stderr, "configuration: parity word must have 1 to 64 characters\n");
    return kConfigError;
  }
  ParityPattern pat;
  pat.len = (u32)fl.word.size();
  for (u32 j = 0; j < pat.len; j++) {
    if (fl.word[j] == '1')
      pat.bits |= (u64)1 << j;
    else if (fl.word[j] != '0') {
      std::fprintf(stderr, "configuration: parity word is 0s and 1s only\n");
      return kConfigError;
    }
  }
  const Mode mode = (fl.mode == "neg" || fl.mode == "negative") ? Mode::negative
                                                                : Mode::positive;
  const u64 n = pattern_to_n(pat, rule_for(mode));
  std::printf("%llu\n", (unsigned long long)n);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collatz convergence verifier: prefix-recursive search with "
               "descent, path-merge, odd-even-even and mod-9 sieves, "
               "precomputed lookahead vectors and 16-step jump tails"};
  app.require_subcommand(1);
  Flags fl;

  CLI::App* pre = app.add_subcommand(
      "precompute", "build and cache the lookahead and mod-9 vectors");
  add_common_flags(pre, fl);
  pre->get_option("--n-bits")->required();

  CLI::App* ver = app.add_subcommand("verify", "verify every n below 2^N");
  add_common_flags(ver, fl);
  ver->get_option("--n-bits")->required();

  CLI::App* spl =
      app.add_subcommand("split", "enumerate independent work-unit roots");
  add_common_flags(spl, fl);
  spl->get_option("--n-bits")->required();

  CLI::App* rec = app.add_subcommand("records", "path-record table");
  add_common_flags(rec, fl);
  rec->add_option("--limit", fl.limit, "scan starts up to this value")
      ->default_val((u64)1 << 21);

  CLI::App* ora = app.add_subcommand(
      "oracle", "exhaustive cross-check of every verdict below 2^N");
  add_common_flags(ora, fl);

  CLI::App* bij = app.add_subcommand(
      "bijection", "starting residue realizing a parity word (bit j = step j)");
  bij->add_option("word", fl.word, "parity word, e.g. 0110")->required();
  bij->add_option("--mode", fl.mode, "pos or neg")
      ->default_val("pos")
      ->check(CLI::IsMember({"pos", "neg", "positive", "negative"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int r = app.exit(e);
    return r == 0 ? kOk : kConfigError;
  }

  try {
    if (pre->parsed()) return cmd_precompute(fl);
    if (ver->parsed()) return cmd_verify(fl);
    if (spl->parsed()) return cmd_split(fl);
    if (rec->parsed()) return cmd_records(fl);
    if (ora->parsed()) return cmd_oracle(fl);
    if (bij->parsed()) return cmd_bijection(fl);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal: %s\n", e.what());
    return kInternalError;
  }
  return kConfigError;
}
