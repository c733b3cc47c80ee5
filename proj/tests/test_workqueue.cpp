#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "zerosum/workqueue.hpp"

using namespace zerosum;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("zs-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static std::atomic<int>& counter() {
    static std::atomic<int> c{0};
    return c;
  }
};

VerifyReport fake_report(u64 n) {
  VerifyReport r;
  r.n = n;
  r.candidates_checked = n;  // recognizable marker value
  r.fallback_checked = n / 10;
  r.elapsed_seconds = 0.001;
  return r;
}

std::vector<std::string> raw_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string l;
  while (std::getline(in, l)) lines.push_back(l);
  return lines;
}

}  // namespace

TEST_CASE("eligibility demands gcd(n,6)=1 and 5|n") {
  for (const u64 n : {5, 25, 35, 55, 65, 115, 995}) CHECK(eligible(n));
  for (const u64 n : {1, 10, 15, 21, 30, 45, 50, 100, 105}) CHECK(!eligible(n));
}

TEST_CASE("closed-form count differs from the scan by the floor correction") {
  CHECK(count_formula(0) == 0);
  CHECK(count_formula(30) == 2);
  CHECK(count_formula(25) == 1);
  CHECK(count_eligible(0, 25) == 2);  // {5, 25}

  u64 direct = 0;
  for (u64 N = 1; N <= 100000; ++N) {
    direct += eligible(N) ? 1 : 0;
    const i64 delta = (N / 2 % 5 != 0) + (N / 3 % 5 != 0) - (N / 6 % 5 != 0);
    CHECK(i64(direct) == count_formula(N) + delta);
  }

  // aligned differences are exact: every window of 30 holds two items
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<u64> pick(0, 100000000);
  for (int i = 0; i < 10000; ++i) {
    const u64 N = pick(rng);
    CHECK(count_formula(N + 30) - count_formula(N) == 2);
  }
}

TEST_CASE("worklist generation") {
  CHECK(generate_worklist(0, 30) == std::vector<u64>{5, 25});
  CHECK(generate_worklist(100, 200) ==
        std::vector<u64>{115, 125, 145, 155, 175, 185});
  const auto w = generate_worklist(1000, 16000);
  CHECK(w.size() == 1000);
  CHECK(w.size() == count_eligible(1000, 16000));
  CHECK(std::is_sorted(w.begin(), w.end()));
  for (const u64 n : w) {
    CHECK(eligible(n));
    CHECK(n > 1000);
    CHECK(n <= 16000);
  }
  CHECK(generate_worklist(25, 25).empty());
}

TEST_CASE("queue init, resume, and mismatch") {
  TempDir t;
  const auto items = generate_worklist(100, 400);
  WorkQueue q = WorkQueue::init(t.path, items);
  CHECK(q.items() == items);
  CHECK(fs::exists(t.path / "pending.txt"));
  CHECK(fs::exists(t.path / "done.txt"));
  CHECK(fs::is_directory(t.path / "claims"));

  // resume with identical items succeeds and changes nothing
  WorkQueue q2 = WorkQueue::init(t.path, items);
  CHECK(q2.items() == items);

  // a different worklist for the same directory is refused
  CHECK_THROWS_AS((void)WorkQueue::init(t.path, generate_worklist(100, 500)),
                  std::runtime_error);

  WorkQueue q3 = WorkQueue::open(t.path);
  CHECK(q3.items() == items);
}

TEST_CASE("open without a queue directory fails") {
  TempDir t;
  CHECK_THROWS_AS((void)WorkQueue::open(t.path / "nope"), std::runtime_error);
}

TEST_CASE("worker ids must be path-safe") {
  TempDir t;
  WorkQueue q = WorkQueue::init(t.path, {25});
  CHECK_THROWS_AS((void)q.claim("", 600s), std::invalid_argument);
  CHECK_THROWS_AS((void)q.claim("a/b", 600s), std::invalid_argument);
}

TEST_CASE("claim and complete drain the queue exactly once per item") {
  TempDir t;
  const auto items = generate_worklist(0, 1200);  // 80 items
  WorkQueue::init(t.path, items);

  constexpr int kWorkers = 4;
  std::vector<std::thread> pool;
  for (int w = 0; w < kWorkers; ++w) {
    pool.emplace_back([&, w] {
      WorkQueue q = WorkQueue::open(t.path);
      const std::string id = "worker" + std::to_string(w);
      for (;;) {
        auto c = q.claim(id, 600s);
        if (!c) {
          const QueueCounts counts = q.snapshot(600s);
          if (counts.pending == 0 && counts.claimed == 0) return;
          std::this_thread::sleep_for(1ms);
          continue;
        }
        q.complete(*c, fake_report(c->n));
      }
    });
  }
  for (auto& th : pool) th.join();

  WorkQueue q = WorkQueue::open(t.path);
  CHECK(q.finished_set() == items);
  const QueueCounts counts = q.snapshot(600s);
  CHECK(counts.pending == 0);
  CHECK(counts.claimed == 0);
  CHECK(counts.done == items.size());
  CHECK(counts.counterexample == 0);

  // done.txt holds each item exactly once, pure base-10 lines
  const auto lines = raw_lines(t.path / "done.txt");
  CHECK(lines.size() == items.size());
  std::set<u64> seen;
  for (const auto& l : lines) {
    CHECK(l.find_first_not_of("0123456789") == std::string::npos);
    seen.insert(std::stoull(l));
  }
  CHECK(seen.size() == items.size());
  CHECK(std::vector<u64>(seen.begin(), seen.end()) == items);

  // digests were written for every item; first record wins on duplicates
  const auto digests = q.report_digests();
  CHECK(digests.size() == items.size());
  for (const auto& d : digests) {
    CHECK(d.candidates == d.n);
    CHECK(d.fallback == d.n / 10);
  }
  CHECK(q.counterexamples().empty());
}

TEST_CASE("completing twice records once; unclaimed completes are rejected") {
  TempDir t;
  WorkQueue q = WorkQueue::init(t.path, {25, 55});
  auto c = q.claim("solo", 600s);
  REQUIRE(c.has_value());
  q.complete(*c, fake_report(c->n));
  q.complete(*c, fake_report(c->n));  // no-op
  CHECK(raw_lines(t.path / "done.txt").size() == 1);

  CHECK_THROWS_AS(q.complete(WorkQueue::Claim{}, fake_report(55)),
                  std::invalid_argument);
}

TEST_CASE("a reclaimed claim cannot complete an unfinished item") {
  TempDir t;
  WorkQueue q = WorkQueue::init(t.path, {25});
  auto c = q.claim("victim", 600s);
  REQUIRE(c.has_value());
  fs::remove(c->marker);  // someone reclaimed us
  CHECK_THROWS_AS(q.complete(*c, fake_report(25)), ClaimReclaimedError);
  // the item is still unfinished and claimable again
  CHECK(q.finished_set().empty());
  auto again = q.claim("victim2", 600s);
  REQUIRE(again.has_value());
  CHECK(again->n == 25);
  q.complete(*again, fake_report(25));
  CHECK(q.finished_set() == std::vector<u64>{25});
}

TEST_CASE("stale markers are reclaimed and reported") {
  TempDir t;
  WorkQueue q = WorkQueue::init(t.path, {35});
  {
    std::ofstream m(t.path / "claims" / "35.deadworker");
    m << "2000-01-01T00:00:00.000000Z\n";
  }
  CHECK(q.snapshot(600s).claimed == 0);  // expired leases do not count

  std::vector<std::pair<u64, std::string>> reclaimed;
  q.on_reclaim = [&](u64 n, const std::string& owner) {
    reclaimed.emplace_back(n, owner);
  };
  auto c = q.claim("rescuer", 600s);
  REQUIRE(c.has_value());
  CHECK(c->n == 35);
  REQUIRE(reclaimed.size() == 1);
  CHECK(reclaimed[0].first == 35);
  CHECK(reclaimed[0].second == "deadworker");
  q.complete(*c, fake_report(35));
}

TEST_CASE("a fresh marker blocks other claimants") {
  TempDir t;
  WorkQueue q1 = WorkQueue::init(t.path, {25});
  WorkQueue q2 = WorkQueue::open(t.path);
  auto c1 = q1.claim("first", 600s);
  REQUIRE(c1.has_value());
  auto c2 = q2.claim("second", 600s);
  CHECK(!c2.has_value());
  const QueueCounts counts = q2.snapshot(600s);
  CHECK(counts.pending == 0);
  CHECK(counts.claimed == 1);
  q1.complete(*c1, fake_report(25));
  CHECK(q2.snapshot(600s).done == 1);
}

TEST_CASE("crash after the durable record but before marker release") {
  TempDir t;
  WorkQueue q = WorkQueue::init(t.path, {25, 55});
  // simulate: a worker wrote its done line, then died holding the marker
  {
    std::ofstream done(t.path / "done.txt", std::ios::app);
    done << "25\n";
  }
  {
    std::ofstream m(t.path / "claims" / "25.ghost");
    m << "2000-01-01T00:00:00.000000Z\n";
  }
  bool reclaim_fired = false;
  q.on_reclaim = [&](u64, const std::string&) { reclaim_fired = true; };
  auto c = q.claim("sweeper", 600s);
  REQUIRE(c.has_value());
  CHECK(c->n == 55);            // 25 is finished, not re-run
  CHECK(!reclaim_fired);        // cleanup of a finished item is not a reclaim
  CHECK(!fs::exists(t.path / "claims" / "25.ghost"));
  q.complete(*c, fake_report(55));
  CHECK(q.finished_set() == std::vector<u64>{25, 55});
  CHECK(raw_lines(t.path / "done.txt").size() == 2);
}

TEST_CASE("counterexample records survive a round trip") {
  TempDir t;
  WorkQueue q = WorkQueue::init(t.path, {25});
  auto c = q.claim("cx", 600s);
  REQUIRE(c.has_value());
  VerifyReport rep = fake_report(25);
  rep.counterexamples.push_back(Sequence4(1, 8, 19, 22));
  q.complete(*c, rep);

  const auto records = q.counterexamples();
  REQUIRE(records.size() == 1);
  CHECK(records[0].n == 25);
  CHECK(records[0].s == Sequence4(1, 8, 19, 22));
  CHECK(records[0].index == index_of(Sequence4(1, 8, 19, 22), 25));

  const QueueCounts counts = q.snapshot(600s);
  CHECK(counts.counterexample == 1);
  CHECK(counts.done == 0);
  CHECK(counts.pending == 0);
  CHECK(q.finished_set() == std::vector<u64>{25});
  CHECK(raw_lines(t.path / "done.txt").empty());
}

TEST_CASE("duplicate digest lines collapse to the first record") {
  TempDir t;
  WorkQueue q = WorkQueue::init(t.path, {25});
  auto c = q.claim("dup", 600s);
  q.complete(*c, fake_report(25));
  {
    std::ofstream r(t.path / "reports.jsonl", std::ios::app);
    r << R"({"n":25,"candidates":999,"fallback":999,"elapsed_seconds":9.0})"
      << "\n";
  }
  const auto digests = q.report_digests();
  REQUIRE(digests.size() == 1);
  CHECK(digests[0].candidates == 25);  // first record, not the forged one
}

TEST_CASE("corrupt pending lines are rejected at open") {
  TempDir t;
  WorkQueue::init(t.path, {25, 55});
  {
    std::ofstream p(t.path / "pending.txt", std::ios::app);
    p << "not-a-number\n";
  }
  CHECK_THROWS_AS((void)WorkQueue::open(t.path), std::runtime_error);
}

TEST_CASE("an empty worklist drains immediately") {
  TempDir t;
  WorkQueue q = WorkQueue::init(t.path, {});
  CHECK(!q.claim("w", 600s).has_value());
  const QueueCounts counts = q.snapshot(600s);
  CHECK(counts.pending == 0);
  CHECK(counts.claimed == 0);
  CHECK(counts.done == 0);
  CHECK(q.finished_set().empty());
}
