// Exact modular arithmetic over Z/nZ: unit groups, zero-sum 4-sequences and
// their index, plus the arithmetic special functions (phi, Ramanujan sums,
// the periodic indicator chi and its Fourier coefficients, harmonic numbers)
// used by the analytic bounds.
//
// Conventions:
//   (y)_n   = least nonnegative representative of y mod n
//   G*      = units of Z/nZ, i.e. integers g with 1 <= g < n and gcd(g,n)=1
//   index(S) = min over g in G* of sum_i (g*a_i)_n / n, an integer for
//              zero-sum S; for minimal zero-sum 4-sequences it is 1 or 2.
//
// All values are immutable after construction and safe to share across
// threads. UnitGroup is the only allocation-heavy object; cache it per n.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace zerosum {

using u64 = std::uint64_t;
using i64 = std::int64_t;

// Four residues mod n. Entry order is irrelevant to every predicate below
// (they are all symmetric), so a Sequence4 is effectively a multiset.
struct Sequence4 {
  std::array<u64, 4> a{};

  constexpr Sequence4() = default;
  constexpr Sequence4(u64 a1, u64 a2, u64 a3, u64 a4) : a{a1, a2, a3, a4} {}

  constexpr u64 operator[](std::size_t i) const { return a[i]; }
  friend constexpr bool operator==(const Sequence4&, const Sequence4&) = default;
  friend constexpr auto operator<=>(const Sequence4&, const Sequence4&) = default;
};

// The units of Z/nZ in increasing order, with O(1) membership via a byte map.
// |units| = phi(n).
struct UnitGroup {
  u64 n = 0;
  std::vector<u64> units;            // sorted, gcd(g,n)=1, 1 <= g < n
  std::vector<std::uint8_t> is_unit_map;  // indexed by residue, size n

  u64 phi() const { return static_cast<u64>(units.size()); }
  bool is_unit(u64 x) const { return x < n && is_unit_map[x] != 0; }
};

// (y)_n for any integer y, including negatives. Total for n >= 1.
u64 least_nonneg(i64 y, u64 n);

// (x*y) mod n, correct for any n < 2^63 (widens to 128-bit when x*y could
// overflow 64 bits).
u64 mulmod(u64 x, u64 y, u64 n);

// Distinct prime factors with multiplicities, by trial division. n >= 1.
std::vector<std::pair<u64, int>> factorize(u64 n);

// Euler phi by trial division. n >= 1.
u64 totient(u64 n);

// Mobius function. n >= 1.
int mobius(u64 n);

// The full unit group of Z/nZ. Requires n >= 2.
UnitGroup unit_group(u64 n);

// sum of entries == 0 mod n?
bool is_zero_sum(const Sequence4& s, u64 n);

// True iff no proper nonempty sub-multiset of s sums to 0 mod n (checks all
// 14). Requires s zero-sum; throws std::invalid_argument otherwise.
bool is_minimal(const Sequence4& s, u64 n);

// sum_i (g*a_i)_n / n for a zero-sum s with unit entries: an integer in
// {1,2,3}. Requires g and all entries to be units (throws std::domain_error).
u64 ratio(const Sequence4& s, u64 g, u64 n);

// index(s) = min over g in G* of ratio(s,g). Requires unit entries.
// Since every ratio is >= 1, the scan stops early once a ratio of 1 is seen;
// the result is still the exact minimum.
u64 index_of(const Sequence4& s, const UnitGroup& units);
u64 index_of(const Sequence4& s, u64 n);

// index together with a g attaining it.
struct IndexWitness {
  u64 value = 0;
  u64 witness = 0;
};
IndexWitness index_with_witness(const Sequence4& s, const UnitGroup& units);

// Ramanujan sum c_n(k) = sum_{g in G*} e(gk/n), evaluated exactly through
// the Mobius/totient closed form c_n(k) = mu(n/d) * phi(n)/phi(n/d) with
// d = gcd(k,n). Always an integer; c_n(0) = phi(n).
i64 ramanujan_sum(u64 n, i64 k);

// Periodic indicator of (0,1/2):
//   chi(t) = 1 if 0 < {t} < 1/2, 1/2 if {t} = 1/2, 0 if {t} > 1/2.
// At {t} = 0 (a jump point the piecewise definition leaves open) we use the
// Fourier-series value 1/2, matching chi_hat below.
double chi(double t);

// Fourier coefficients of chi: 1/2 at k=0, 0 for even k != 0, 1/(i*pi*k)
// for odd k (purely imaginary, magnitude 1/(pi*|k|)).
std::complex<double> chi_hat(i64 k);

// m-th harmonic number, summed smallest-term-first. Requires m >= 1.
double harmonic(u64 m);

}  // namespace zerosum
