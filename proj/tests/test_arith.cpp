#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "zerosum/arith.hpp"

using namespace zerosum;

TEST_CASE("least_nonneg covers negatives and multiples") {
  CHECK(least_nonneg(0, 7) == 0);
  CHECK(least_nonneg(13, 7) == 6);
  CHECK(least_nonneg(-1, 7) == 6);
  CHECK(least_nonneg(-14, 7) == 0);
  CHECK(least_nonneg(-15, 7) == 6);
  CHECK(least_nonneg(7, 1) == 0);
  CHECK(least_nonneg(-9223372036854775807LL, 2) == 1);
}

TEST_CASE("mulmod is exact even when the product overflows 64 bits") {
  CHECK(mulmod(3, 4, 5) == 2);
  CHECK(mulmod(0, 9, 7) == 0);
  const u64 n = (u64(1) << 62) - 57;
  const u64 x = n - 1, y = n - 2;
  // (n-1)(n-2) = n^2 - 3n + 2 == 2 mod n
  CHECK(mulmod(x, y, n) == 2);
  CHECK(mulmod(x, x, n) == 1);
}

TEST_CASE("factorize, totient, mobius agree on small n") {
  const auto f60 = factorize(60);
  REQUIRE(f60.size() == 3);
  CHECK(f60[0] == std::pair<u64, int>{2, 2});
  CHECK(f60[1] == std::pair<u64, int>{3, 1});
  CHECK(f60[2] == std::pair<u64, int>{5, 1});

  CHECK(totient(1) == 1);
  CHECK(totient(25) == 20);
  CHECK(totient(9973) == 9972);  // prime

  CHECK(mobius(1) == 1);
  CHECK(mobius(2) == -1);
  CHECK(mobius(6) == 1);
  CHECK(mobius(4) == 0);
  CHECK(mobius(30) == -1);

  for (u64 n = 1; n <= 500; ++n) {
    u64 phi = n;
    for (const auto& [p, e] : factorize(n)) phi = phi / p * (p - 1);
    CHECK(totient(n) == phi);
  }
}

TEST_CASE("unit_group lists exactly the residues coprime to n") {
  const UnitGroup u = unit_group(25);
  CHECK(u.n == 25);
  CHECK(u.phi() == 20);
  for (u64 x = 0; x < 25; ++x)
    CHECK(u.is_unit(x) == (std::gcd(x, u64(25)) == 1));
  CHECK(!u.is_unit(25));
  CHECK(!u.is_unit(1000));
  CHECK(std::is_sorted(u.units.begin(), u.units.end()));
}

TEST_CASE("zero-sum and minimality predicates") {
  CHECK(is_zero_sum(Sequence4(1, 1, 1, 2), 5));
  CHECK(!is_zero_sum(Sequence4(1, 1, 1, 1), 5));
  CHECK(is_minimal(Sequence4(1, 1, 1, 2), 5));
  // 1 + 4 == 0 mod 5: a proper sub-multiset vanishes
  CHECK(!is_minimal(Sequence4(1, 4, 2, 3), 5));
  CHECK_THROWS_AS((void)is_minimal(Sequence4(1, 1, 1, 1), 5),
                  std::invalid_argument);
}

TEST_CASE("ratio and index on pinned examples") {
  const Sequence4 s(1, 1, 1, 2);
  CHECK(ratio(s, 1, 5) == 1);
  CHECK(ratio(s, 4, 5) == 3);
  CHECK(index_of(s, 5) == 1);
  CHECK(index_of(Sequence4(1, 3, 3, 3), 5) == 1);
  CHECK(index_of(Sequence4(1, 2, 3, 1), 7) == 1);

  const UnitGroup u5 = unit_group(5);
  const IndexWitness w = index_with_witness(s, u5);
  CHECK(w.value == 1);
  CHECK(w.witness == 1);
  CHECK(ratio(s, w.witness, 5) == w.value);

  CHECK_THROWS_AS((void)ratio(Sequence4(1, 5, 2, 2), 10, 3),
                  std::domain_error);  // non-unit g
  CHECK_THROWS_AS((void)ratio(Sequence4(0, 1, 1, 3), 1, 5),
                  std::domain_error);  // non-unit entry
}

namespace {

// random zero-sum sequence with unit entries
Sequence4 random_unit_zero_sum(const UnitGroup& u, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, u.units.size() - 1);
  for (;;) {
    const u64 a1 = u.units[pick(rng)];
    const u64 a2 = u.units[pick(rng)];
    const u64 a3 = u.units[pick(rng)];
    const u64 a4 = least_nonneg(-i64(a1 + a2 + a3), u.n);
    if (u.is_unit(a4)) return Sequence4(a1, a2, a3, a4);
  }
}

}  // namespace

TEST_CASE("index properties hold on fixed-seed random sequences") {
  std::mt19937_64 rng(0x5eed5eed);
  std::uniform_int_distribution<u64> pick_n(5, 400);
  unsigned checked = 0;
  while (checked < 4000) {
    const u64 n = pick_n(rng);
    const UnitGroup u = unit_group(n);
    if (u.phi() < 2) continue;
    const Sequence4 s = random_unit_zero_sum(u, rng);
    const u64 idx = index_of(s, u);

    // ratio(s,g) + ratio(s,n-g) == 4 for every unit g
    std::uniform_int_distribution<std::size_t> pick(0, u.units.size() - 1);
    const u64 g = u.units[pick(rng)];
    CHECK(ratio(s, g, n) + ratio(s, n - g, n) == 4);

    // index is invariant under multiplication by a unit
    const Sequence4 gs(mulmod(g, s[0], n), mulmod(g, s[1], n),
                       mulmod(g, s[2], n), mulmod(g, s[3], n));
    CHECK(index_of(gs, u) == idx);

    // minimal zero-sum 4-sequences have index 1 or 2
    if (is_minimal(s, n)) CHECK((idx == 1 || idx == 2));

    const IndexWitness w = index_with_witness(s, u);
    CHECK(w.value == idx);
    CHECK(ratio(s, w.witness, n) == idx);
    ++checked;
  }
}

TEST_CASE("Ramanujan sums match the direct exponential sum") {
  CHECK(ramanujan_sum(5, 1) == -1);
  CHECK(ramanujan_sum(6, 1) == 1);
  CHECK(ramanujan_sum(9, 3) == -3);
  for (u64 n = 1; n <= 200; ++n) CHECK(ramanujan_sum(n, 0) == i64(totient(n)));

  for (i64 k = -3; k <= 3; ++k) CHECK(ramanujan_sum(1, k) == 1);

  constexpr double tau = 2.0 * std::numbers::pi;
  for (u64 n = 2; n <= 120; ++n) {
    const UnitGroup u = unit_group(n);
    for (i64 k = -i64(n); k <= i64(n); ++k) {
      double direct = 0.0;
      for (const u64 g : u.units)
        direct += std::cos(tau * double(g) * double(k) / double(n));
      CHECK(std::abs(direct - double(ramanujan_sum(n, k))) < 1e-6);
    }
  }
}

TEST_CASE("chi takes the Fourier value at its jump points") {
  CHECK(chi(0.25) == 1.0);
  CHECK(chi(0.75) == 0.0);
  CHECK(chi(0.5) == 0.5);
  CHECK(chi(0.0) == 0.5);
  CHECK(chi(3.25) == 1.0);
  CHECK(chi(-0.25) == 0.0);  // {-0.25} = 0.75
  CHECK(chi(-0.75) == 1.0);
}

TEST_CASE("chi_hat coefficients") {
  using std::complex;
  CHECK(chi_hat(0) == complex<double>(0.5, 0.0));
  CHECK(chi_hat(2) == complex<double>(0.0, 0.0));
  CHECK(chi_hat(-4) == complex<double>(0.0, 0.0));
  const double pi = std::numbers::pi;
  CHECK(std::abs(chi_hat(1) - complex<double>(0.0, -1.0 / pi)) < 1e-15);
  CHECK(std::abs(chi_hat(-3) - std::conj(chi_hat(3))) < 1e-15);
  CHECK(std::abs(std::abs(chi_hat(5)) - 1.0 / (5.0 * pi)) < 1e-15);

  // the truncated series reproduces chi away from jumps
  double s = chi_hat(0).real();
  const double t = 0.3;
  for (i64 k = 1; k <= 4001; ++k) {
    const double angle = 2.0 * pi * double(k) * t;
    s += 2.0 * (chi_hat(k) * complex<double>(std::cos(angle),
                                             std::sin(angle))).real();
  }
  CHECK(std::abs(s - chi(t)) < 1e-3);
}

TEST_CASE("harmonic numbers") {
  CHECK(harmonic(1) == 1.0);
  CHECK(harmonic(2) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(harmonic(4) == doctest::Approx(25.0 / 12.0).epsilon(1e-15));
  // H_m = ln m + gamma + 1/(2m) - O(1/m^2)
  CHECK(harmonic(1000000) ==
        doctest::Approx(std::log(1e6) + 0.5772156649015329 + 5e-7)
            .epsilon(1e-12));
}
