#include "zerosum/workqueue.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

namespace zerosum {

bool eligible(u64 n) { return n % 5 == 0 && n % 2 != 0 && n % 3 != 0; }

i64 count_formula(u64 N) {
  const i64 n2 = static_cast<i64>(N / 2);
  const i64 n3 = static_cast<i64>(N / 3);
  const i64 n5 = static_cast<i64>(N / 5);
  const i64 n6 = static_cast<i64>(N / 6);
  return -(n2 + n3 - n5) + (n6 + 4 * n2 / 5 + 4 * n3 / 5) - 4 * n6 / 5;
}

u64 count_eligible(u64 N, u64 M) {
  u64 c = 0;
  for (u64 n = N + 1; n != 0 && n <= M; ++n) c += eligible(n);
  return c;
}

std::vector<u64> generate_worklist(u64 N, u64 M) {
  std::vector<u64> out;
  if (M <= N) return out;
  for (u64 base = N / 30 * 30; base <= M; base += 30) {
    for (const u64 r : {u64(5), u64(25)}) {
      const u64 n = base + r;
      if (n > N && n <= M) out.push_back(n);
    }
  }
  return out;
}

namespace {

namespace fs = std::filesystem;
using sysclock = std::chrono::system_clock;
using json = nlohmann::json;

[[noreturn]] void throw_errno(int err, const std::string& what) {
  throw std::system_error(err, std::generic_category(), what);
}

std::string iso_timestamp(sysclock::time_point tp) {
  using namespace std::chrono;
  const auto secs = time_point_cast<seconds>(tp);
  long long us = duration_cast<microseconds>(tp - secs).count();
  std::time_t t = sysclock::to_time_t(secs);
  if (us < 0) {
    us += 1000000;
    t -= 1;
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, us);
  return buf;
}

std::optional<sysclock::time_point> parse_iso(const std::string& s) {
  std::tm tm{};
  long long us = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d.%lldZ", &tm.tm_year,
                  &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                  &tm.tm_sec, &us) != 7)
    return std::nullopt;
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t t = timegm(&tm);
  if (t == static_cast<std::time_t>(-1)) return std::nullopt;
  return sysclock::from_time_t(t) + std::chrono::microseconds(us);
}

// One write(2) so concurrent appenders never interleave bytes; synced so
// the record survives a crash of the caller.
void append_durable(const fs::path& p, const std::string& data) {
  const int fd = ::open(p.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd < 0) throw_errno(errno, "open " + p.string());
  const ssize_t w = ::write(fd, data.data(), data.size());
  if (w != static_cast<ssize_t>(data.size())) {
    const int err = errno;
    ::close(fd);
    throw_errno(err, "write " + p.string());
  }
  if (::fdatasync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw_errno(err, "fdatasync " + p.string());
  }
  ::close(fd);
}

// Only lines terminated by '\n' count; a trailing fragment is an append in
// flight and is ignored.
std::vector<std::string> complete_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  const std::string all((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t nl = all.find('\n'); nl != std::string::npos;
       nl = all.find('\n', start)) {
    if (nl > start) out.push_back(all.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

std::optional<u64> parse_u64(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end == nullptr || *end != '\0') return std::nullopt;
  return static_cast<u64>(v);
}

std::set<u64> read_n_set(const fs::path& p) {
  std::set<u64> out;
  for (const auto& l : complete_lines(p))
    if (const auto v = parse_u64(l)) out.insert(*v);
  return out;
}

std::set<u64> read_cx_set(const fs::path& p) {
  std::set<u64> out;
  for (const auto& l : complete_lines(p)) {
    const json j = json::parse(l, nullptr, false);
    if (!j.is_discarded() && j.contains("n") && j["n"].is_number_unsigned())
      out.insert(j["n"].get<u64>());
  }
  return out;
}

std::set<u64> read_finished(const fs::path& dir) {
  std::set<u64> out = read_n_set(dir / "done.txt");
  const std::set<u64> cx = read_cx_set(dir / "counterexamples.jsonl");
  out.insert(cx.begin(), cx.end());
  return out;
}

struct Marker {
  u64 n = 0;
  std::string owner;
  fs::path path;
  std::optional<sysclock::time_point> ts;  // nullopt: vanished under us
};

std::vector<Marker> scan_markers(const fs::path& claims) {
  std::vector<Marker> out;
  std::error_code ec;
  for (fs::directory_iterator it(claims, ec), end; !ec && it != end;
       it.increment(ec)) {
    const std::string name = it->path().filename().string();
    if (name.empty() || name[0] == '.') continue;  // temp files
    const std::size_t dot = name.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == name.size())
      continue;
    const auto n = parse_u64(name.substr(0, dot));
    if (!n) continue;
    Marker m;
    m.n = *n;
    m.owner = name.substr(dot + 1);
    m.path = it->path();
    std::ifstream in(m.path);
    std::string line;
    if (in && std::getline(in, line)) {
      m.ts = parse_iso(line);
      if (!m.ts) m.ts = sysclock::time_point{};  // garbage content: stale
    } else if (!fs::exists(m.path)) {
      continue;  // removed between readdir and open
    } else {
      m.ts = sysclock::time_point{};  // unreadable: treat as stale
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

WorkQueue::WorkQueue(fs::path dir) : dir_(std::move(dir)) {
  for (const auto& l : complete_lines(dir_ / "pending.txt")) {
    const auto v = parse_u64(l);
    if (!v)
      throw std::runtime_error("corrupt pending.txt line \"" + l + "\" in " +
                               dir_.string());
    items_.push_back(*v);
  }
}

WorkQueue WorkQueue::init(const fs::path& dir,
                          const std::vector<u64>& items) {
  fs::create_directories(dir / "claims");
  std::string content;
  for (const u64 n : items) content += std::to_string(n) + "\n";

  const fs::path pending = dir / "pending.txt";
  if (fs::exists(pending)) {
    std::ifstream in(pending, std::ios::binary);
    const std::string existing((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (existing != content)
      throw std::runtime_error("queue at " + dir.string() +
                               " already holds a different worklist");
  } else {
    const fs::path tmp =
        dir / (".pending.tmp." + std::to_string(::getpid()));
    {
      std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
      out << content;
      if (!out)
        throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, pending);  // atomic publish
  }
  { std::ofstream touch(dir / "done.txt", std::ios::app); }
  return WorkQueue(dir);
}

WorkQueue WorkQueue::open(const fs::path& dir) {
  if (!fs::exists(dir / "pending.txt"))
    throw std::runtime_error("no queue at " + dir.string() +
                             " (pending.txt missing)");
  fs::create_directories(dir / "claims");
  return WorkQueue(dir);
}

std::optional<WorkQueue::Claim> WorkQueue::claim(
    const std::string& worker_id, std::chrono::seconds lease) {
  if (worker_id.empty() || worker_id.find('/') != std::string::npos)
    throw std::invalid_argument("worker id must be a nonempty path-safe "
                                "token");
  const fs::path claims = dir_ / "claims";
  std::set<u64> finished = read_finished(dir_);

  std::map<u64, std::vector<Marker>> by_n;
  for (auto& m : scan_markers(claims)) by_n[m.n].push_back(std::move(m));

  for (const u64 n : items_) {
    if (finished.count(n)) {
      // tidy markers left by a recorder that died between its durable write
      // and the release; a still-live holder cleans up its own marker when
      // its complete() no-ops, so only expired ones are removed here
      if (const auto it = by_n.find(n); it != by_n.end()) {
        const auto now = sysclock::now();
        for (const Marker& m : it->second) {
          if (m.ts && now - *m.ts <= lease) continue;
          std::error_code ec;
          fs::remove(m.path, ec);
        }
      }
      continue;
    }

    bool live = false;
    std::vector<const Marker*> stale;
    const auto now = sysclock::now();
    if (const auto it = by_n.find(n); it != by_n.end()) {
      for (const Marker& m : it->second) {
        if (!m.ts) continue;
        if (now - *m.ts <= lease)
          live = true;
        else
          stale.push_back(&m);
      }
    }
    if (live) continue;

    if (!stale.empty()) {
      // the stale owner may have recorded its result and died before
      // releasing the marker: re-read before reclaiming
      finished = read_finished(dir_);
      if (finished.count(n)) {
        for (const Marker* m : stale) {
          std::error_code ec;
          fs::remove(m->path, ec);
        }
        continue;
      }
      for (const Marker* m : stale) {
        std::error_code ec;
        if (fs::remove(m->path, ec) && on_reclaim) on_reclaim(n, m->owner);
      }
    }

    // publish our marker: temp file first so the content is complete at
    // link time, then the atomic link
    const fs::path marker = claims / (std::to_string(n) + "." + worker_id);
    const fs::path tmp = claims / (".tmp." + worker_id);
    {
      std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
      out << iso_timestamp(sysclock::now()) << "\n";
      if (!out) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot write claim file in " +
                                 claims.string());
      }
    }
    const int rc = ::link(tmp.c_str(), marker.c_str());
    const int err = errno;
    {
      std::error_code ec;
      fs::remove(tmp, ec);
    }
    if (rc != 0) {
      if (err == EEXIST) continue;  // a marker under our name exists: skip
      throw_errno(err, "link " + marker.string());
    }

    // arbitration: if any other live marker exists we defer (the later
    // linker always sees the earlier one, so two racers never both win)
    bool defer = false;
    const auto now2 = sysclock::now();
    for (const Marker& m : scan_markers(claims)) {
      if (m.n != n || m.owner == worker_id) continue;
      if (m.ts && now2 - *m.ts <= lease) defer = true;
    }
    if (!defer && read_finished(dir_).count(n)) defer = true;
    if (defer) {
      std::error_code ec;
      fs::remove(marker, ec);
      continue;
    }
    return Claim{n, marker, worker_id};
  }
  return std::nullopt;
}

void WorkQueue::complete(const Claim& c, const VerifyReport& report) {
  if (c.n == 0 || c.worker_id.empty())
    throw std::invalid_argument("complete: claim was never issued");
  std::error_code ec;
  if (read_finished(dir_).count(c.n)) {
    fs::remove(c.marker, ec);  // retry of an already-recorded item
    return;
  }
  if (!fs::exists(c.marker))
    throw ClaimReclaimedError(
        "claim on " + std::to_string(c.n) +
        " was reclaimed before completion; discarding this result");

  {
    json d;
    d["n"] = c.n;
    d["candidates"] = report.candidates_checked;
    d["fallback"] = report.fallback_checked;
    d["elapsed_seconds"] = report.elapsed_seconds;
    append_durable(dir_ / "reports.jsonl", d.dump() + "\n");
  }

  if (!report.counterexamples.empty()) {
    std::string lines;
    for (const Sequence4& s : report.counterexamples) {
      json j;
      j["n"] = c.n;
      j["sequence"] = {s[0], s[1], s[2], s[3]};
      j["index"] = index_of(s, c.n);
      lines += j.dump();
      lines += '\n';
    }
    append_durable(dir_ / "counterexamples.jsonl", lines);
  } else {
    append_durable(dir_ / "done.txt", std::to_string(c.n) + "\n");
  }
  fs::remove(c.marker, ec);
}

QueueCounts WorkQueue::snapshot(std::chrono::seconds lease) const {
  QueueCounts qc;
  const std::set<u64> done = read_n_set(dir_ / "done.txt");
  const std::set<u64> cx = read_cx_set(dir_ / "counterexamples.jsonl");
  std::set<u64> live;
  const auto now = sysclock::now();
  for (const Marker& m : scan_markers(dir_ / "claims"))
    if (m.ts && now - *m.ts <= lease) live.insert(m.n);
  for (const u64 n : items_) {
    if (cx.count(n))
      ++qc.counterexample;
    else if (done.count(n))
      ++qc.done;
    else if (live.count(n))
      ++qc.claimed;
    else
      ++qc.pending;
  }
  return qc;
}

std::vector<u64> WorkQueue::finished_set() const {
  const std::set<u64> fin = read_finished(dir_);
  std::vector<u64> out;
  for (const u64 n : items_)
    if (fin.count(n)) out.push_back(n);
  return out;
}

std::vector<ReportDigest> WorkQueue::report_digests() const {
  std::vector<ReportDigest> out;
  std::set<u64> seen;
  for (const auto& l : complete_lines(dir_ / "reports.jsonl")) {
    const json j = json::parse(l, nullptr, false);
    if (j.is_discarded() || !j.contains("n")) continue;
    ReportDigest d;
    d.n = j["n"].get<u64>();
    if (!seen.insert(d.n).second) continue;
    d.candidates = j.value("candidates", u64{0});
    d.fallback = j.value("fallback", u64{0});
    d.elapsed_seconds = j.value("elapsed_seconds", 0.0);
    out.push_back(d);
  }
  return out;
}

std::vector<CounterexampleRecord> WorkQueue::counterexamples() const {
  std::vector<CounterexampleRecord> out;
  for (const auto& l : complete_lines(dir_ / "counterexamples.jsonl")) {
    const json j = json::parse(l, nullptr, false);
    if (j.is_discarded() || !j.contains("n") || !j.contains("sequence") ||
        !j.contains("index"))
      continue;
    CounterexampleRecord r;
    r.n = j["n"].get<u64>();
    const auto& seq = j["sequence"];
    if (!seq.is_array() || seq.size() != 4) continue;
    r.s = Sequence4(seq[0].get<u64>(), seq[1].get<u64>(), seq[2].get<u64>(),
                    seq[3].get<u64>());
    r.index = j["index"].get<u64>();
    out.push_back(r);
  }
  return out;
}

}  // namespace zerosum
