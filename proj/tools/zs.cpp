// zs: command-line front end. Every command is a thin adapter over one
// core entry point; no arithmetic lives here.
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zerosum/arith.hpp"
#include "zerosum/bounds.hpp"
#include "zerosum/verifier.hpp"
#include "zerosum/workqueue.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace zerosum;

namespace {

using ull = unsigned long long;

std::string random_tag() {
  std::random_device rd;
  char buf[8];
  std::snprintf(buf, sizeof buf, "%04x", rd() & 0xffffu);
  return buf;
}

// "4.6e13" from a value already rounded to two significant figures
std::string two_sf(double x) {
  const int e = static_cast<int>(std::floor(std::log10(x) + 1e-12));
  const double mant = x / std::pow(10.0, e);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fe%d", mant, e);
  return buf;
}

std::string seq_str(const Sequence4& s) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%llu, %llu, %llu, %llu)", ull{s[0]},
                ull{s[1]}, ull{s[2]}, ull{s[3]});
  return buf;
}

json seq_json(const Sequence4& s) { return json{s[0], s[1], s[2], s[3]}; }

// ----- worker pool: claim / verify / complete until the queue drains -----

struct PoolResult {
  u64 items_this_run = 0;
  std::string error;  // first worker failure, empty on success
};

PoolResult run_pool(const fs::path& dir, unsigned threads,
                    std::chrono::seconds lease, u64 a_min, long progress_s) {
  const std::string base =
      "w" + std::to_string(::getpid()) + "-" + random_tag();
  std::atomic<bool> abort{false};
  std::atomic<u64> items_done{0};
  std::mutex err_mu;
  std::string first_error;

  auto worker = [&](unsigned idx) {
    try {
      WorkQueue q = WorkQueue::open(dir);
      q.on_reclaim = [](u64 n, const std::string& owner) {
        std::fprintf(stderr, "reclaim: expired lease on %llu held by %s\n",
                      ull{n}, owner.c_str());
      };
      const std::string wid = base + ".t" + std::to_string(idx);
      std::mt19937_64 rng(std::hash<std::string>{}(wid));
      while (!abort.load(std::memory_order_relaxed)) {
        std::optional<WorkQueue::Claim> c = q.claim(wid, lease);
        if (!c) {
          const QueueCounts qc = q.snapshot(lease);
          if (qc.pending == 0 && qc.claimed == 0) return;  // drained
          std::this_thread::sleep_for(
              std::chrono::milliseconds(100 + rng() % 300));
          continue;
        }
        try {
          q.complete(*c, verify_modulus(c->n, 1, a_min));
          items_done.fetch_add(1, std::memory_order_relaxed);
        } catch (const ClaimReclaimedError& e) {
          std::fprintf(stderr, "warning: %s\n", e.what());
        }
      }
    } catch (const std::exception& e) {
      std::scoped_lock lk(err_mu);
      if (first_error.empty()) first_error = e.what();
      abort.store(true, std::memory_order_relaxed);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker, i);

  std::atomic<bool> stop{false};
  std::thread monitor;
  if (progress_s > 0) {
    monitor = std::thread([&, progress_s] {
      WorkQueue q = WorkQueue::open(dir);
      const u64 total = q.items().size();
      const auto t0 = std::chrono::steady_clock::now();
      u64 prev = 0;
      bool have_prev = false;
      while (!stop.load(std::memory_order_relaxed)) {
        for (long i = 0; i < progress_s * 10; ++i) {
          if (stop.load(std::memory_order_relaxed)) return;
          std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        const QueueCounts qc = q.snapshot(lease);
        const u64 fin = qc.done + qc.counterexample;
        const double el =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
        const double rate = have_prev
                                ? static_cast<double>(fin - prev) /
                                      static_cast<double>(progress_s)
                                : static_cast<double>(fin) / el;
        std::fprintf(stderr,
                     "progress: %llu/%llu finished, %llu claimed, "
                     "%.1f moduli/s, %.0f s elapsed\n",
                     ull{fin}, ull{total}, ull{qc.claimed}, rate, el);
        prev = fin;
        have_prev = true;
      }
    });
  }

  for (auto& t : pool) t.join();
  stop.store(true, std::memory_order_relaxed);
  if (monitor.joinable()) monitor.join();
  return {items_done.load(), first_error};
}

// ----- shared summary over a queue directory -----

struct Summary {
  u64 eligible = 0;
  u64 clean = 0;
  u64 cx_items = 0;
  u64 candidates = 0;
  u64 fallback = 0;
  double cpu_seconds = 0.0;
  std::vector<CounterexampleRecord> cx;
};

Summary summarize(const WorkQueue& q, std::chrono::seconds lease) {
  Summary s;
  s.eligible = q.items().size();
  const QueueCounts qc = q.snapshot(lease);
  s.clean = qc.done;
  s.cx_items = qc.counterexample;
  s.cx = q.counterexamples();
  std::set<u64> items(q.items().begin(), q.items().end());
  for (const ReportDigest& d : q.report_digests()) {
    if (!items.count(d.n)) continue;
    s.candidates += d.candidates;
    s.fallback += d.fallback;
    s.cpu_seconds += d.elapsed_seconds;
  }
  return s;
}

int report_queue_outcome(const Summary& s, u64 from, u64 to, unsigned threads,
                         u64 a_min, const fs::path& dir, double wall,
                         bool json_out) {
  if (json_out) {
    json j;
    j["from"] = from;
    j["to"] = to;
    j["a_min"] = a_min;
    j["threads"] = threads;
    j["checkpoint"] = dir.string();
    j["eligible"] = s.eligible;
    j["verified_clean"] = s.clean;
    j["counterexample_items"] = s.cx_items;
    j["candidates_checked"] = s.candidates;
    j["fallback_checked"] = s.fallback;
    j["cpu_seconds"] = s.cpu_seconds;
    j["wall_seconds"] = wall;
    j["counterexamples"] = json::array();
    for (const auto& r : s.cx)
      j["counterexamples"].push_back(
          {{"n", r.n}, {"sequence", seq_json(r.s)}, {"index", r.index}});
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("%-16s (%llu, %llu]\n", "range", ull{from}, ull{to});
    std::printf("%-16s %llu\n", "eligible moduli", ull{s.eligible});
    std::printf("%-16s %llu\n", "verified clean", ull{s.clean});
    std::printf("%-16s %llu\n", "counterexamples", ull{s.cx_items});
    std::printf("%-16s %llu (fallback %llu)\n", "candidates",
                ull{s.candidates}, ull{s.fallback});
    std::printf("%-16s %.1f s (%.1f moduli/s), cpu %.1f s, threads %u\n",
                "wall", wall,
                wall > 0 ? static_cast<double>(s.eligible) / wall : 0.0,
                s.cpu_seconds, threads);
    std::printf("%-16s %s\n", "checkpoint", dir.string().c_str());
    for (const auto& r : s.cx)
      std::printf("counterexample  n=%llu s=%s index=%llu\n", ull{r.n},
                  seq_str(r.s).c_str(), ull{r.index});
  }
  return s.cx.empty() ? 0 : 1;
}

// ----- commands -----

struct RangeOptions {
  u64 from = 1000;
  u64 to = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  u64 a_min = 7;
  std::string checkpoint;
  long lease_s = 600;
  long progress_s = 10;
  bool json_out = false;
};

int cmd_verify(const RangeOptions& o) {
  if (o.from >= o.to)
    throw std::invalid_argument("--from must be strictly below --to");
  fs::path dir;
  bool ephemeral = false;
  if (!o.checkpoint.empty()) {
    dir = o.checkpoint;
  } else {
    dir = fs::temp_directory_path() /
          ("zs-queue-" + std::to_string(::getpid()) + "-" + random_tag());
    ephemeral = true;
  }
  const auto t0 = std::chrono::steady_clock::now();
  WorkQueue q = WorkQueue::init(dir, generate_worklist(o.from, o.to));
  const PoolResult pr = run_pool(dir, o.threads, std::chrono::seconds(o.lease_s),
                                 o.a_min, o.progress_s);
  if (!pr.error.empty()) throw std::runtime_error(pr.error);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const Summary s = summarize(q, std::chrono::seconds(o.lease_s));
  if (s.clean + s.cx_items != s.eligible)
    throw std::runtime_error("queue did not drain (finished " +
                             std::to_string(s.clean + s.cx_items) + " of " +
                             std::to_string(s.eligible) + ")");
  const int rc = report_queue_outcome(s, o.from, o.to, o.threads, o.a_min,
                                      dir, wall, o.json_out);
  if (ephemeral && rc == 0) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  return rc;
}

int cmd_queue_init(const std::string& dir, u64 from, u64 to, bool json_out) {
  if (from >= to)
    throw std::invalid_argument("--from must be strictly below --to");
  const bool existed = fs::exists(fs::path(dir) / "pending.txt");
  WorkQueue q = WorkQueue::init(dir, generate_worklist(from, to));
  if (json_out) {
    json j;
    j["dir"] = dir;
    j["from"] = from;
    j["to"] = to;
    j["items"] = q.items().size();
    j["resumed"] = existed;
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("%s queue at %s: %llu items over (%llu, %llu]\n",
                existed ? "resumed" : "initialized", dir.c_str(),
                ull{q.items().size()}, ull{from}, ull{to});
  }
  return 0;
}

int cmd_queue_run(const std::string& dir, unsigned threads, long lease_s,
                  u64 a_min, long progress_s, bool json_out) {
  const auto t0 = std::chrono::steady_clock::now();
  WorkQueue q = WorkQueue::open(dir);
  const PoolResult pr =
      run_pool(dir, threads, std::chrono::seconds(lease_s), a_min, progress_s);
  if (!pr.error.empty()) throw std::runtime_error(pr.error);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const Summary s = summarize(q, std::chrono::seconds(lease_s));
  u64 from = 0, to = 0;
  if (!q.items().empty()) {
    from = q.items().front() - 1;  // display only; the range is implicit
    to = q.items().back();
  }
  return report_queue_outcome(s, from, to, threads, a_min, dir, wall,
                              json_out);
}

int cmd_index(u64 n, const std::vector<u64>& entries, bool json_out) {
  Sequence4 s(least_nonneg(static_cast<i64>(entries[0] % n), n),
              least_nonneg(static_cast<i64>(entries[1] % n), n),
              least_nonneg(static_cast<i64>(entries[2] % n), n),
              least_nonneg(static_cast<i64>(entries[3] % n), n));
  const UnitGroup units = unit_group(n);
  const u64 residue_sum = (s[0] + s[1] + s[2] + s[3]) % n;
  if (residue_sum != 0)
    throw std::invalid_argument("not a zero-sum sequence: residues sum to " +
                                std::to_string(residue_sum) + " (mod " +
                                std::to_string(n) + ")");
  const bool minimal = is_minimal(s, n);
  const IndexWitness w = index_with_witness(s, units);
  if (json_out) {
    json j;
    j["n"] = n;
    j["sequence"] = seq_json(s);
    j["minimal"] = minimal;
    j["index"] = w.value;
    j["witness"] = w.witness;
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("%-9s %llu\n", "n", ull{n});
    std::printf("%-9s %s\n", "sequence", seq_str(s).c_str());
    std::printf("%-9s %s\n", "minimal", minimal ? "yes" : "no");
    std::printf("%-9s %llu\n", "index", ull{w.value});
    std::printf("%-9s g = %llu\n", "witness", ull{w.witness});
  }
  return 0;
}

int cmd_oracle(u64 n, u64 cap, bool json_out) {
  const std::vector<OracleEntry> entries = brute_force_oracle(n, cap);
  bool all_one = true;
  for (const auto& e : entries) all_one = all_one && e.index == 1;
  if (json_out) {
    json j;
    j["n"] = n;
    j["count"] = entries.size();
    j["all_index_one"] = all_one;
    j["entries"] = json::array();
    for (const auto& e : entries)
      j["entries"].push_back(
          {{"sequence", seq_json(e.s)}, {"index", e.index}});
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    for (const auto& e : entries)
      std::printf("%-28s index %llu\n", seq_str(e.s).c_str(), ull{e.index});
    std::printf("%llu minimal zero-sum sequences mod %llu, %s\n",
                ull{entries.size()}, ull{n},
                all_one ? "all index 1" : "NOT all index 1");
  }
  return 0;
}

int cmd_bounds(const std::vector<u64>& primes, u64 H, double seed,
               bool json_out) {
  const PrimeSet P = make_prime_set(primes);
  const BoundParams params = make_params(H);
  const ThresholdResult r = solve_threshold(P, H, seed);
  if (json_out) {
    json j;
    j["primes"] = P.primes;
    j["H"] = H;
    j["c0"] = params.c0;
    j["c1"] = params.c1;
    j["n_star"] = r.n_star;
    j["margin"] = r.margin_at_n_star;
    j["reported"] = r.rounded;
    j["reported_str"] = two_sf(r.rounded);
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("%-9s %s\n", "primes", P.label().c_str());
    std::printf("%-9s %llu\n", "H", ull{H});
    std::printf("%-9s %.10f\n", "c0", params.c0);
    std::printf("%-9s %.10f\n", "c1", params.c1);
    std::printf("%-9s %llu (%.6e)\n", "n*", ull{r.n_star},
                static_cast<double>(r.n_star));
    std::printf("%-9s %s\n", "reported", two_sf(r.rounded).c_str());
    std::printf("%-9s %.6e\n", "margin", r.margin_at_n_star);
  }
  return 0;
}

int cmd_table(u64 H, bool json_out) {
  const std::vector<ThresholdRow> rows = threshold_table(H);
  if (json_out) {
    json j = json::array();
    for (const auto& row : rows)
      j.push_back({{"label", row.label},
                   {"H", row.result.H},
                   {"n_star", row.result.n_star},
                   {"margin", row.result.margin_at_n_star},
                   {"reported", row.result.rounded},
                   {"reported_str", two_sf(row.result.rounded)}});
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("%-20s %-18s %s\n", "assumption", "n*", "reported");
    for (const auto& row : rows)
      std::printf("%-20s %-18.6e %s\n", row.label.c_str(),
                  static_cast<double>(row.result.n_star),
                  two_sf(row.result.rounded).c_str());
  }
  return 0;
}

int cmd_count(u64 N, u64 M, bool json_out) {
  if (N >= M)
    throw std::invalid_argument("range start must be strictly below the end");
  const i64 formula = count_formula(M) - count_formula(N);
  const u64 direct = count_eligible(N, M);
  const i64 delta = static_cast<i64>(direct) - formula;
  if (json_out) {
    json j;
    j["from"] = N;
    j["to"] = M;
    j["formula"] = formula;
    j["direct"] = direct;
    j["delta"] = delta;
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("%-9s (%llu, %llu]\n", "range", ull{N}, ull{M});
    std::printf("%-9s %lld\n", "formula", static_cast<long long>(formula));
    std::printf("%-9s %llu\n", "direct", ull{direct});
    std::printf("%-9s %lld\n", "delta", static_cast<long long>(delta));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-sum 4-sequence index toolkit over Z/nZ"};
  app.require_subcommand(1);

  RangeOptions vo;
  auto* verify = app.add_subcommand(
      "verify", "exhaustively verify eligible moduli over a range");
  verify->add_option("--from", vo.from, "range start, exclusive")
      ->capture_default_str();
  verify->add_option("--to", vo.to, "range end, inclusive")->required();
  verify->add_option("--threads", vo.threads, "worker threads")
      ->capture_default_str();
  verify->add_option("--a-min", vo.a_min, "candidate a lower cutoff")
      ->check(CLI::IsMember({2, 7}))
      ->capture_default_str();
  verify
      ->add_option("--checkpoint", vo.checkpoint,
                   "queue directory for resumable runs")
      ->envname("ZS_CHECKPOINT_DIR");
  verify->add_option("--lease", vo.lease_s, "claim lease seconds")
      ->capture_default_str();
  verify
      ->add_option("--progress", vo.progress_s,
                   "progress interval seconds (0: off)")
      ->capture_default_str();
  verify->add_flag("--json", vo.json_out, "machine-readable output");

  u64 idx_n = 0;
  std::vector<u64> idx_entries;
  auto* index = app.add_subcommand(
      "index", "index and witness of a zero-sum 4-sequence");
  index->add_option("n", idx_n, "modulus")->required();
  index->add_option("entries", idx_entries, "four residues")
      ->expected(4)
      ->required();
  bool idx_json = false;
  index->add_flag("--json", idx_json, "machine-readable output");

  u64 or_n = 0, or_cap = 3000;
  bool or_json = false;
  auto* oracle = app.add_subcommand(
      "oracle", "all normalized minimal zero-sum 4-sequences with indices");
  oracle->add_option("--n", or_n, "modulus")->required();
  oracle->add_option("--cap", or_cap, "largest modulus accepted")
      ->capture_default_str();
  oracle->add_flag("--json", or_json, "machine-readable output");

  std::vector<u64> b_primes{2, 3};
  u64 b_H = 7000;
  double b_seed = 1e6;
  bool b_json = false;
  auto* bounds = app.add_subcommand(
      "bounds", "threshold beyond which the analytic bound certifies");
  bounds->add_option("--primes", b_primes, "primes known coprime to n")
      ->delimiter(',')
      ->capture_default_str();
  bounds->add_option("--H", b_H, "Fourier cutoff")->capture_default_str();
  bounds->add_option("--seed", b_seed, "initial bracket seed")
      ->capture_default_str();
  bounds->add_flag("--json", b_json, "machine-readable output");

  u64 t_H = 7000;
  bool t_json = false;
  auto* table = app.add_subcommand(
      "table", "threshold table under cumulative coprimality assumptions");
  table->add_option("--H", t_H, "Fourier cutoff")->capture_default_str();
  table->add_flag("--json", t_json, "machine-readable output");

  u64 c_N = 0, c_M = 0;
  bool c_json = false;
  auto* count = app.add_subcommand(
      "count", "eligible-modulus count: closed formula vs direct scan");
  count->add_option("N", c_N, "range start, exclusive")->required();
  count->add_option("M", c_M, "range end, inclusive")->required();
  count->add_flag("--json", c_json, "machine-readable output");

  std::string qi_dir;
  u64 qi_from = 1000, qi_to = 0;
  bool qi_json = false;
  auto* qinit = app.add_subcommand("queue-init",
                                   "create or resume a work queue directory");
  qinit->add_option("--dir", qi_dir, "queue directory")->required();
  qinit->add_option("--from", qi_from, "range start, exclusive")
      ->capture_default_str();
  qinit->add_option("--to", qi_to, "range end, inclusive")->required();
  qinit->add_flag("--json", qi_json, "machine-readable output");

  std::string qr_dir;
  unsigned qr_threads = std::max(1u, std::thread::hardware_concurrency());
  long qr_lease = 600, qr_progress = 10;
  u64 qr_amin = 7;
  bool qr_json = false;
  auto* qrun = app.add_subcommand(
      "queue-run", "work an existing queue until it drains");
  qrun->add_option("--dir", qr_dir, "queue directory")->required();
  qrun->add_option("--threads", qr_threads, "worker threads")
      ->capture_default_str();
  qrun->add_option("--lease", qr_lease, "claim lease seconds")
      ->capture_default_str();
  qrun->add_option("--a-min", qr_amin, "candidate a lower cutoff")
      ->check(CLI::IsMember({2, 7}))
      ->capture_default_str();
  qrun->add_option("--progress", qr_progress,
                   "progress interval seconds (0: off)")
      ->capture_default_str();
  qrun->add_flag("--json", qr_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(verify)) return cmd_verify(vo);
    if (app.got_subcommand(index)) return cmd_index(idx_n, idx_entries, idx_json);
    if (app.got_subcommand(oracle)) return cmd_oracle(or_n, or_cap, or_json);
    if (app.got_subcommand(bounds))
      return cmd_bounds(b_primes, b_H, b_seed, b_json);
    if (app.got_subcommand(table)) return cmd_table(t_H, t_json);
    if (app.got_subcommand(count)) return cmd_count(c_N, c_M, c_json);
    if (app.got_subcommand(qinit))
      return cmd_queue_init(qi_dir, qi_from, qi_to, qi_json);
    if (app.got_subcommand(qrun))
      return cmd_queue_run(qr_dir, qr_threads, qr_lease, qr_amin, qr_progress,
                           qr_json);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
