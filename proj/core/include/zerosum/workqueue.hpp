// Eligible-modulus worklists and a multi-process, crash-safe work queue
// over a shared directory.
//
// An n is worth checking only when gcd(n,6)=1 and 5|n (other residues are
// settled). Worklists enumerate those n over a range; the closed-form
// counting expression is kept verbatim for comparison, with the direct
// scan as the source of truth (the two differ by a small characterized
// offset; see count_formula).
//
// Queue layout under one directory, all integers base-10:
//   pending.txt            every item, ascending, immutable after init
//   done.txt               append-only: items verified clean
//   counterexamples.jsonl  append-only: one {n, sequence, index} per line
//   reports.jsonl          append-only digest per finished item (candidate
//                          and fallback counts, wall seconds), written just
//                          before the terminal record so resumed runs can
//                          report totals over work done by earlier runs;
//                          advisory only, never part of the finished set
//   claims/<n>.<worker-id> lease marker holding an ISO-8601 UTC timestamp
//
// Claim protocol: write the timestamp to a temp file, then link(2) it to
// the marker name (atomic creation with content). The claimant then
// re-lists markers for that n: seeing any other live marker means a racer
// is in flight, so it removes its own marker and moves on. Two racers can
// both defer (never both win: the later linker always observes the
// earlier marker), so contested items resolve on a later pass. Markers
// older than the lease are treated as dead and removed; the finished set
// is re-read before reclaiming so a crash between "record done" and
// "remove marker" never causes a re-run.
//
// An item is finished once its line lands in done.txt or its records land
// in counterexamples.jsonl; that write is fdatasync'd before the marker is
// released. Completing an already-finished item is a no-op, so retries and
// slow duplicate holders cannot double-record.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zerosum/arith.hpp"
#include "zerosum/verifier.hpp"

namespace zerosum {

// Raised by complete() when the caller's lease was reclaimed and the item
// is still unfinished: the caller's result is discarded, the reclaimer
// owns the item. Benign under at-least-once execution; callers typically
// log and move on.
class ClaimReclaimedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// gcd(n,6)=1 and 5|n.
bool eligible(u64 n);

// The closed-form count, evaluated with exact integer floors:
//   -(N/2 + N/3 - N/5) + (N/6 + (4*(N/2))/5 + (4*(N/3))/5) - (4*(N/6))/5.
// Equals the number of eligible n in [1,N] minus a correction delta(N) in
// {0,1,2} (delta = [5 does not divide N/2] + [5 does not divide N/3] -
// [5 does not divide N/6], characterized by test); exact differences over
// aligned ranges still hold: c(N+30)-c(N) = 2 for every N.
i64 count_formula(u64 N);

// Direct scan: number of eligible n in (N, M].
u64 count_eligible(u64 N, u64 M);

// All eligible n in (N, M], ascending.
std::vector<u64> generate_worklist(u64 N, u64 M);

struct QueueCounts {
  u64 pending = 0;
  u64 claimed = 0;  // live leases on unfinished items
  u64 done = 0;
  u64 counterexample = 0;  // items finished with a nonempty counterexample set
};

struct CounterexampleRecord {
  u64 n = 0;
  Sequence4 s;
  u64 index = 0;
};

// Per-item summary persisted at completion (duplicates from crash-retry
// are collapsed on read, first record wins).
struct ReportDigest {
  u64 n = 0;
  u64 candidates = 0;
  u64 fallback = 0;
  double elapsed_seconds = 0.0;
};

class WorkQueue {
 public:
  // Creates the layout and writes pending.txt atomically. Reopening an
  // existing queue directory succeeds only if its pending.txt holds
  // exactly `items` (resume); otherwise throws.
  static WorkQueue init(const std::filesystem::path& dir,
                        const std::vector<u64>& items);

  // Opens an existing queue (throws if pending.txt is missing).
  static WorkQueue open(const std::filesystem::path& dir);

  struct Claim {
    u64 n = 0;
    std::filesystem::path marker;
    std::string worker_id;
  };

  // Claims one unfinished, unclaimed item. Returns nullopt when nothing is
  // claimable right now (possibly because live leases cover the rest --
  // consult snapshot() to tell "all finished" from "wait and retry").
  // worker_id must be unique among concurrent workers.
  std::optional<Claim> claim(const std::string& worker_id,
                             std::chrono::seconds lease);

  // Durably records the outcome, then releases the marker. Counterexample
  // reports go to counterexamples.jsonl, clean reports to done.txt; either
  // write is flushed before the marker is removed. No-op if the item is
  // already finished; throws if the claim was reclaimed by another worker
  // and the item is not finished (the work is discarded, the reclaimer
  // owns it now).
  void complete(const Claim& c, const VerifyReport& report);

  QueueCounts snapshot(std::chrono::seconds lease) const;

  const std::vector<u64>& items() const { return items_; }
  std::vector<u64> finished_set() const;  // sorted, done + counterexample
  std::vector<CounterexampleRecord> counterexamples() const;
  std::vector<ReportDigest> report_digests() const;  // deduped by n
  const std::filesystem::path& dir() const { return dir_; }

  // Called when a stale (lease-expired) marker is removed during claim;
  // receives the item and the stale owner's worker id.
  std::function<void(u64, const std::string&)> on_reclaim;

 private:
  explicit WorkQueue(std::filesystem::path dir);

  std::filesystem::path dir_;
  std::vector<u64> items_;
};

}  // namespace zerosum
