#include "zerosum/verifier.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>

namespace zerosum {

namespace {

using u32 = std::uint32_t;
using i32 = std::int32_t;

void require_coprime6(u64 n) {
  if (n < 5 || n % 2 == 0 || n % 3 == 0)
    throw std::domain_error("modulus " + std::to_string(n) +
                            " must be >= 5 and coprime to 6");
}

}  // namespace

CandidateRange candidate_range(u64 n, u64 a_min) {
  require_coprime6(n);
  CandidateRange r;
  r.n = n;
  r.a_lo = a_min;
  r.a_hi = (n - 1) / 2;  // a < n/2, n odd
  return r;
}

CandidateStream::CandidateStream(const UnitGroup& units, u64 a_min)
    : units_(units), range_(candidate_range(units.n, a_min)), a_(range_.a_lo),
      b_(0) {}

std::optional<Sequence4> CandidateStream::next() {
  const u64 n = range_.n;
  while (a_ <= range_.a_hi) {
    if (units_.is_unit(a_)) {
      const u64 bhi = range_.b_hi(a_);
      if (b_ < range_.b_lo(a_)) b_ = range_.b_lo(a_);
      while (b_ <= bhi) {
        const u64 b = b_++;
        const u64 c = 2 * n - 1 - a_ - b;  // b >= n+2-a keeps c < n
        if (units_.is_unit(b) && units_.is_unit(c))
          return Sequence4(1, a_, b, c);
      }
    }
    ++a_;
    b_ = 0;
  }
  return std::nullopt;
}

bool check_candidate(const Sequence4& s, const UnitGroup& units) {
  const u64 n = units.n;
  const u64 two_n = 2 * n;
  for (u64 g : units.units) {
    u64 sum = 0;
    for (unsigned i = 0; i < 4; ++i) sum += mulmod(g, s[i], n);
    if (sum != two_n) return true;  // ratio != 2
  }
  return false;
}

std::vector<OracleEntry> brute_force_oracle(u64 n, u64 cap) {
  if (n < 2) throw std::domain_error("oracle requires n >= 2");
  if (n > cap)
    throw std::invalid_argument("oracle refuses n = " + std::to_string(n) +
                                " above cap " + std::to_string(cap) +
                                " (cost grows with phi(n)^2)");
  const UnitGroup units = unit_group(n);
  const auto& U = units.units;
  std::vector<OracleEntry> out;
  for (std::size_t i = 0; i < U.size(); ++i) {
    for (std::size_t j = i; j < U.size(); ++j) {
      const u64 x = U[i], y = U[j];
      const u64 z = (3 * n - 1 - x - y) % n;  // -(1+x+y) mod n, 1+x+y < 3n
      if (z < y || !units.is_unit(z)) continue;  // z >= y dedups multisets
      const Sequence4 s(1, x, y, z);
      if (!is_minimal(s, n)) continue;
      out.push_back({s, index_of(s, units)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify_modulus fast path.
//
// Candidate membership for fixed a is a bitwise AND: b is a candidate iff
// unit_bits[b] and rev_bits[a+b], where rev_bits[t] marks 2n-1-t (mod n)
// being a unit. Certified b-runs are counted by popcount over those words.
//
// Certification: for each ladder g, count_g(b) = #{below n/2 of
// (g)_n,(ga)_n,(gb)_n,(gc)_n} equals a per-(g,a) base plus indicators of
// (gb mod n) lying in one of two residue intervals: [1,hf] for the b term
// and [S-hf, S-1] mod n for the c term (S = g(2n-1-a) mod n, since
// gc = S - gb mod n). Both indicators are unions of b-runs with O(g)
// breakpoints across the window, so count_g is a step function; in any
// segment where some count_g != 2 every candidate has index 1.

namespace {

// multipliers of the form 2^i 3^j: units whenever gcd(n,6)=1. Longer
// ladders certify more segments (the unresolved fraction roughly halves
// every three entries) but the sweep-event count per a grows with the sum
// of the multipliers, so the effective prefix length is picked per modulus
// in make_ctx: the fallback share only pays off against events at large n.
constexpr u64 kLadder[] = {2,  3,  4,  6,  8,  9,  12, 16,
                           18, 24, 27, 32, 36, 48, 54};
constexpr unsigned kNumLadder = sizeof(kLadder) / sizeof(kLadder[0]);

// round-up reciprocals: floor(x/g) == (x * kMagic[i]) >> 64 for all
// x < 2^57, exact since g <= 128 (error term x*d < 2^64 with d <= g)
constexpr std::array<u64, kNumLadder> kMagic = [] {
  std::array<u64, kNumLadder> m{};
  for (unsigned i = 0; i < kNumLadder; ++i) m[i] = ~u64(0) / kLadder[i] + 1;
  return m;
}();

inline u64 div_magic(u64 x, u64 magic) {
  return static_cast<u64>((static_cast<unsigned __int128>(x) * magic) >> 64);
}

// x mod n for any x < 2^64 given magic = floor(2^64/n): the quotient
// estimate is short by at most 2, fixed by conditional subtractions.
inline u64 barrett_mod(u64 x, u64 n, u64 magic) {
  u64 r = x - div_magic(x, magic) * n;
  while (r >= n) r -= n;
  return r;
}

struct Bitmap {
  std::vector<u64> w;

  void init(u64 bits) { w.assign((bits >> 6) + 2, 0); }  // padded for shifts
  void set(u64 i) { w[i >> 6] |= u64(1) << (i & 63); }
};

struct FastCtx {
  u64 n = 0;
  u64 hf = 0;  // (n-1)/2
  const UnitGroup* units = nullptr;
  Bitmap unit_bits;  // bit x: x is a unit, x in [0,n)
  Bitmap rev_bits;   // bit t: (2n-1-t) mod n is a unit, t in [0,2n)
  // residues the ladder already covers; the fallback skips them since a
  // candidate only reaches it with every ladder count equal to 2
  std::vector<std::uint8_t> ladder_residue;
  u64 n_magic = 0;   // floor(2^64/n) for Barrett reduction
  unsigned nl = kNumLadder;  // effective ladder length, tuned to n
  // small hashed sample of units, cache resident: candidates that dodge the
  // ladder still have witnesses at high density, so a couple of probes here
  // usually settle them without touching the full unit array
  std::array<u64, 64> probe{};
};

FastCtx make_ctx(const UnitGroup& units) {
  FastCtx C;
  C.n = units.n;
  C.hf = (units.n - 1) / 2;
  C.units = &units;
  C.unit_bits.init(units.n);
  for (u64 g : units.units) C.unit_bits.set(g);
  C.rev_bits.init(2 * units.n);
  for (u64 t = 0; t < 2 * units.n; ++t) {
    u64 v = 2 * units.n - 1 - t;
    if (v >= units.n) v -= units.n;
    if (units.is_unit_map[v]) C.rev_bits.set(t);
  }
  // tuned on measured batches: short ladders win while sweep events
  // dominate (small n), longer ones once the fallback share does (large n)
  C.nl = units.n <= 5000 ? 6 : units.n <= 20000 ? 9 : units.n <= 60000 ? 12
                                                                       : 15;
  C.ladder_residue.assign(units.n, 0);
  for (unsigned i = 0; i < C.nl; ++i)
    C.ladder_residue[kLadder[i] % units.n] = 1;
  C.n_magic = ~u64(0) / units.n;  // == floor(2^64/n): n is odd, > 1
  const std::size_t m = units.units.size();
  for (std::size_t i = 0; i < C.probe.size(); ++i)
    C.probe[i] = units.units[(i * 0x9E3779B9ull + 0x7F4A7C15ull) % m];
  return C;
}

struct Event {
  u64 b;
  u32 g_idx;
  i32 delta;
};

struct Sweep {
  std::vector<Event> events;  // scratch, reused across a values
  u64 candidates = 0;
  u64 fallback = 0;
  std::vector<Sequence4> bad;
};

// Runs of b in [blo,bhi] with (g*b mod n) in [L,R] (0 <= L <= R < n):
// the run covering blo bumps init_count, interior boundaries become events.
void interval_runs(u64 g, u64 magic, u64 L, u64 R, u64 blo, u64 bhi, u64 n,
                   u32 gi, int& init_count, std::vector<Event>& events) {
  if (g * bhi < L) return;
  const u64 k_lo = (g * blo > R) ? (g * blo - R + n - 1) / n : 0;
  const u64 k_hi = (g * bhi - L) / n;
  for (u64 k = k_lo; k <= k_hi; ++k) {
    u64 s = div_magic(k * n + L + g - 1, magic);
    u64 e = div_magic(k * n + R, magic);
    if (s < blo) s = blo;
    if (e > bhi) e = bhi;
    if (s > e) continue;
    if (s == blo)
      ++init_count;
    else
      events.push_back({s, gi, +1});
    if (e < bhi) events.push_back({e + 1, gi, -1});
  }
}

// Masked candidate word w for this a: units AND shifted reverse-units.
inline u64 cand_word(const FastCtx& C, u64 a, u64 w) {
  const u64 sh = a & 63;
  const u64 qa = a >> 6;
  const u64* R = C.rev_bits.w.data();
  const u64 rv =
      sh == 0 ? R[qa + w] : (R[qa + w] >> sh) | (R[qa + w + 1] << (64 - sh));
  return C.unit_bits.w[w] & rv;
}

inline u64 edge_mask(u64 lo, u64 hi, u64 w) {
  u64 m = ~u64(0);
  if (w == (lo >> 6)) m &= ~u64(0) << (lo & 63);
  if (w == (hi >> 6)) {
    const u64 top = hi & 63;
    if (top != 63) m &= (u64(1) << (top + 1)) - 1;
  }
  return m;
}

u64 count_range(const FastCtx& C, u64 a, u64 lo, u64 hi) {
  u64 total = 0;
  for (u64 w = lo >> 6; w <= (hi >> 6); ++w)
    total += static_cast<u64>(
        std::popcount(cand_word(C, a, w) & edge_mask(lo, hi, w)));
  return total;
}

// One combined test at multiplier g: a ratio differing from 2 or a
// below-half count differing from 2 both certify index 1 for s.
inline bool probe_g(const FastCtx& C, const Sequence4& s, u64 g) {
  u64 sum = g;             // g*s[0] mod n with s[0] == 1
  unsigned below = g <= C.hf;
  for (unsigned i = 1; i < 4; ++i) {
    // both factors < 2^32, so the product cannot overflow
    const u64 r = barrett_mod(g * s[i], C.n, C.n_magic);
    sum += r;
    below += r <= C.hf;  // r != 0 for unit entries
  }
  return sum != 2 * C.n || below != 2;
}

// Per-candidate test, used only on unresolved segments. Candidates that
// dodge the whole smooth ladder still have witnesses at roughly 45% density
// among the units, but clustered AWAY from small values, so ascending order
// is pathological. Tier 1 walks the cache-resident sample from a salted
// start and almost always hits within a few probes; tier 2 scans all units
// so the overall certificate stays unconditional. The salt keeps the order
// deterministic per candidate, so reports are reproducible and independent
// of threading.
bool fallback_ok(const FastCtx& C, const Sequence4& s, u64 salt) {
  for (std::size_t t = 0, i = salt & 63; t < C.probe.size(); ++t) {
    if (probe_g(C, s, C.probe[i])) return true;
    i = (i + 1) & 63;
  }
  const std::vector<u64>& U = C.units->units;
  const std::size_t m = U.size();
  std::size_t idx =
      static_cast<std::size_t>((salt * 0x9E3779B97F4A7C15ull) >> 32) % m;
  for (std::size_t t = 0; t < m; ++t) {
    const u64 g = U[idx];
    ++idx;
    if (idx == m) idx = 0;
    if (C.ladder_residue[g]) continue;  // sweep already found count 2
    if (probe_g(C, s, g)) return true;
  }
  return false;
}

void scan_range(const FastCtx& C, u64 a, u64 lo, u64 hi, Sweep& S) {
  for (u64 w = lo >> 6; w <= (hi >> 6); ++w) {
    u64 x = cand_word(C, a, w) & edge_mask(lo, hi, w);
    while (x) {
      const u64 b = (w << 6) + static_cast<u64>(std::countr_zero(x));
      x &= x - 1;
      const Sequence4 s(1, a, b, 2 * C.n - 1 - a - b);
      ++S.candidates;
      ++S.fallback;
      if (!fallback_ok(C, s, b)) S.bad.push_back(s);
    }
  }
}

void sweep_a(const FastCtx& C, u64 a, Sweep& S) {
  const u64 n = C.n, hf = C.hf;
  const u64 blo = n + 2 - a;
  const u64 bhi = (2 * n - 3 - a) / 2;
  if (blo > bhi) return;  // only for a < 7

  int counts[kNumLadder];
  S.events.clear();
  for (u32 gi = 0; gi < C.nl; ++gi) {
    const u64 g = kLadder[gi];
    const u64 mg = kMagic[gi];
    const u64 r1 = g % n;  // nonzero: gcd(g,n)=1
    int c = r1 <= hf ? 1 : 0;
    const u64 ra = g * a % n;
    c += ra >= 1 && ra <= hf;
    interval_runs(g, mg, 1, hf, blo, bhi, n, gi, c, S.events);
    const u64 s0 = g * ((2 * n - 1 - a) % n) % n;  // gc = s0 - gb mod n
    const u64 Lc = (s0 + n - hf) % n;
    const u64 Rc = (s0 + n - 1) % n;
    if (Lc <= Rc) {
      interval_runs(g, mg, Lc, Rc, blo, bhi, n, gi, c, S.events);
    } else {
      interval_runs(g, mg, Lc, n - 1, blo, bhi, n, gi, c, S.events);
      interval_runs(g, mg, 0, Rc, blo, bhi, n, gi, c, S.events);
    }
    counts[gi] = c;
  }
  std::sort(S.events.begin(), S.events.end(),
            [](const Event& x, const Event& y) { return x.b < y.b; });

  unsigned eq2 = 0;
  for (u32 gi = 0; gi < C.nl; ++gi) eq2 += counts[gi] == 2;

  u64 cur = blo;
  std::size_t ei = 0;
  const std::size_t ne = S.events.size();
  while (cur <= bhi) {
    u64 nxt = bhi + 1;
    if (ei < ne && S.events[ei].b < nxt) nxt = S.events[ei].b;
    if (eq2 != C.nl)  // some ladder count differs from 2: certified
      S.candidates += count_range(C, a, cur, nxt - 1);
    else
      scan_range(C, a, cur, nxt - 1, S);
    cur = nxt;
    while (ei < ne && S.events[ei].b == cur) {
      int& c = counts[S.events[ei].g_idx];
      eq2 -= c == 2;
      c += S.events[ei].delta;
      eq2 += c == 2;
      ++ei;
    }
  }
}

}  // namespace

VerifyReport verify_modulus(u64 n, unsigned threads, u64 a_min) {
  require_coprime6(n);
  if (n >= (u64(1) << 32))
    throw std::domain_error("verify_modulus: n >= 2^32 exceeds the fast-path "
                            "limit");
  const auto t0 = std::chrono::steady_clock::now();

  VerifyReport rep;
  rep.n = n;
  rep.a_range_used = candidate_range(n, a_min);

  if (n <= 100) {
    // the pruned ranges are only exhaustive for n > 100: fall back to the
    // unpruned normalized enumeration, which is cheap at this size
    for (const auto& e : brute_force_oracle(n, 100)) {
      ++rep.candidates_checked;
      if (e.index != 1) rep.counterexamples.push_back(e.s);
    }
  } else {
    const UnitGroup units = unit_group(n);
    const FastCtx C = make_ctx(units);
    if (threads == 0) threads = 1;

    std::atomic<u64> next_a{rep.a_range_used.a_lo};
    const u64 a_hi = rep.a_range_used.a_hi;
    std::vector<Sweep> partial(threads);
    auto work = [&](unsigned ti) {
      Sweep& S = partial[ti];
      S.events.reserve(128);
      for (;;) {
        const u64 a = next_a.fetch_add(1, std::memory_order_relaxed);
        if (a > a_hi) break;
        if (units.is_unit_map[a]) sweep_a(C, a, S);
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }

    std::vector<Sequence4> bad;
    for (const Sweep& S : partial) {
      rep.candidates_checked += S.candidates;
      rep.fallback_checked += S.fallback;
      bad.insert(bad.end(), S.bad.begin(), S.bad.end());
    }
    // a reported counterexample is a major claim: confirm with the full
    // index before surfacing it
    for (const Sequence4& s : bad)
      if (index_of(s, units) != 1) rep.counterexamples.push_back(s);
    std::sort(rep.counterexamples.begin(), rep.counterexamples.end());
  }

  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

}  // namespace zerosum
