#include "zerosum/arith.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace zerosum {

u64 least_nonneg(i64 y, u64 n) {
  if (n == 0) throw std::domain_error("least_nonneg: modulus must be >= 1");
  const i64 m = static_cast<i64>(n);
  i64 r = y % m;
  if (r < 0) r += m;
  return static_cast<u64>(r);
}

u64 mulmod(u64 x, u64 y, u64 n) {
  if (x < (1ull << 32) && y < (1ull << 32)) return (x * y) % n;
  return static_cast<u64>((static_cast<unsigned __int128>(x) * y) % n);
}

std::vector<std::pair<u64, int>> factorize(u64 n) {
  if (n == 0) throw std::domain_error("factorize: n must be >= 1");
  std::vector<std::pair<u64, int>> out;
  for (u64 p = 2; p * p <= n; p += (p == 2) ? 1 : 2) {
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

u64 totient(u64 n) {
  if (n == 0) throw std::domain_error("totient: n must be >= 1");
  u64 r = n;
  for (const auto& [p, e] : factorize(n)) r -= r / p;
  return r;
}

int mobius(u64 n) {
  if (n == 0) throw std::domain_error("mobius: n must be >= 1");
  int sign = 1;
  for (const auto& [p, e] : factorize(n)) {
    if (e > 1) return 0;
    sign = -sign;
  }
  return sign;
}

UnitGroup unit_group(u64 n) {
  if (n < 2) throw std::domain_error("unit_group: n must be >= 2");
  UnitGroup g;
  g.n = n;
  g.is_unit_map.assign(n, 1);
  g.is_unit_map[0] = 0;
  // mark multiples of each prime factor instead of per-residue gcd
  for (const auto& [p, e] : factorize(n)) {
    for (u64 m = p; m < n; m += p) g.is_unit_map[m] = 0;
  }
  u64 count = 0;
  for (u64 x = 1; x < n; ++x) count += g.is_unit_map[x];
  g.units.reserve(count);
  for (u64 x = 1; x < n; ++x) {
    if (g.is_unit_map[x]) g.units.push_back(x);
  }
  return g;
}

bool is_zero_sum(const Sequence4& s, u64 n) {
  // entries < n so the sum is < 4n, well under 2^64
  return (s[0] + s[1] + s[2] + s[3]) % n == 0;
}

bool is_minimal(const Sequence4& s, u64 n) {
  if (!is_zero_sum(s, n))
    throw std::invalid_argument("is_minimal: sequence is not zero-sum");
  // masks 1..14 are the proper nonempty sub-multisets
  for (unsigned mask = 1; mask < 15; ++mask) {
    u64 sum = 0;
    for (unsigned i = 0; i < 4; ++i) {
      if (mask & (1u << i)) sum += s[i];
    }
    if (sum % n == 0) return false;
  }
  return true;
}

namespace {

void require_unit_entries(const Sequence4& s, u64 n) {
  for (unsigned i = 0; i < 4; ++i) {
    if (s[i] == 0 || s[i] >= n || std::gcd(s[i], n) != 1)
      throw std::domain_error("sequence entry " + std::to_string(s[i]) +
                              " is not a unit mod " + std::to_string(n));
  }
}

u64 ratio_unchecked(const Sequence4& s, u64 g, u64 n) {
  u64 sum = 0;
  for (unsigned i = 0; i < 4; ++i) sum += mulmod(g, s[i], n);
  return sum / n;
}

}  // namespace

u64 ratio(const Sequence4& s, u64 g, u64 n) {
  require_unit_entries(s, n);
  if (g == 0 || g >= n || std::gcd(g, n) != 1)
    throw std::domain_error("ratio: g must be a unit mod n");
  return ratio_unchecked(s, g, n);
}

u64 index_of(const Sequence4& s, const UnitGroup& units) {
  return index_with_witness(s, units).value;
}

u64 index_of(const Sequence4& s, u64 n) {
  return index_of(s, unit_group(n));
}

IndexWitness index_with_witness(const Sequence4& s, const UnitGroup& units) {
  const u64 n = units.n;
  require_unit_entries(s, n);
  IndexWitness best{4, 0};
  for (u64 g : units.units) {
    const u64 r = ratio_unchecked(s, g, n);
    if (r < best.value) {
      best = {r, g};
      if (r == 1) break;  // ratios are >= 1: this is the global minimum
    }
  }
  return best;
}

i64 ramanujan_sum(u64 n, i64 k) {
  if (n == 0) throw std::domain_error("ramanujan_sum: n must be >= 1");
  const u64 d = std::gcd(least_nonneg(k, n), n);  // gcd(0,n) = n covers k=0
  const u64 m = n / d;
  const int mu = mobius(m);
  if (mu == 0) return 0;
  return static_cast<i64>(mu) * static_cast<i64>(totient(n) / totient(m));
}

double chi(double t) {
  double frac = t - std::floor(t);
  if (frac == 0.0 || frac == 0.5) return 0.5;
  return frac < 0.5 ? 1.0 : 0.0;
}

std::complex<double> chi_hat(i64 k) {
  if (k == 0) return {0.5, 0.0};
  if (k % 2 == 0) return {0.0, 0.0};
  // 1/(i*pi*k) = -i/(pi*k)
  return {0.0, -1.0 / (std::numbers::pi * static_cast<double>(k))};
}

double harmonic(u64 m) {
  if (m == 0) throw std::domain_error("harmonic: m must be >= 1");
  double sum = 0.0;
  for (u64 k = m; k >= 1; --k) sum += 1.0 / static_cast<double>(k);
  return sum;
}

}  // namespace zerosum
