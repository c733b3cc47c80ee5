// Analytic lower-bound machinery for the index conjecture at large n.
//
// The certificate has the shape: for a normalized candidate (1,a,b,c) the
// weighted count of units g whose three rotated values g/n, (ga)_n/n,
// (gb)_n/n all land in (0,1/2) is bounded below by
//
//   W(n) = c1*phi(n) - (7/24)*sqrt(2 H^2 n)
//          - ((3/2)*((2/pi)(harm(2*theta) - harm(theta)/2))^2 + 20.02)*sqrt(2 H n)
//          - 7H,        theta = ceil(H/2),
//
// and W(n) > 0 certifies index 1. phi(n) is replaced by an explicit
// totient lower bound so W depends on n alone; solving W(n) = 0 yields the
// threshold beyond which the conjecture holds. Everything here evaluates
// that chain in double precision: the individual bound terms, the constants
// c0/c1, the totient lower bound parametrized by a set of primes known to
// be coprime to n, the threshold solver, and the table of thresholds under
// extra coprimality assumptions.
//
// Thresholds sit near 10^13, leaving ~3 digits of double headroom; reported
// values are rounded UP to 2 significant figures since an "n > threshold"
// statement must never be understated.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zerosum/arith.hpp"

namespace zerosum {

// Distinct primes guaranteed coprime to the target modulus class, used to
// sharpen the totient lower bound. Default {2,3} (moduli coprime to 6).
struct PrimeSet {
  std::vector<u64> primes;  // sorted, distinct
  u64 product = 1;          // prod of primes
  u64 phi_of_product = 1;   // phi(product) = prod (p-1)

  std::string label() const;  // "{2,3,7}"
};

// Validates (distinct, >= 2) and precomputes the products.
PrimeSet make_prime_set(std::vector<u64> primes);

// The constants feeding W(n) for a given Fourier cutoff H.
//   c0 = 1/8 - (0.079021 + 0.079021 + 1/12)/2   (rounded pair constant)
//   c1 = c0 - 13.02/H                            (smoothing loss folded in)
// c1 > 0 requires H > 13.02/c0 ~ 3019.
struct BoundParams {
  u64 H = 0;
  u64 theta = 0;  // ceil(H/2)
  double c0 = 0.0;
  double c1 = 0.0;
  double gamma = 0.0;         // Euler's constant
  double rosser_const = 0.0;  // 2.50637
};

BoundParams make_params(u64 H);

// Exact value of 9/(16 pi^2) + 1/4 - 9/(4 pi^2) ~ 0.0790205, the per-phi(n)
// coefficient bounding the aligned-pair correlation sum. Its 6-digit
// round-up 0.079021 is what enters c0.
double aligned_pair_constant();

// Bound on the residual aligned-pair sum: sqrt(2 H^2 n)/4, tightened to
// /12 when a linear relation 3b+-1 or b+-3 = 0 (mod n) holds (special).
double residual_pair_bound(double n, u64 H, bool special);

// Bound on the generic (off-diagonal) pair sum:
//   sqrt(2 H n) * ((2/pi)(harm(2*theta) - harm(theta)/2))^2.
double tail_pair_bound(double n, u64 H);

// Explicit totient lower bound: with p = product of P's primes,
//   phi(n) > n*p / (phi(p) * (e^gamma loglog(n*p) + 2.50637/loglog(n*p))),
// valid when every prime of P is coprime to n. Requires loglog(n*p) > 0.
double totient_lower_bound(double n, const PrimeSet& P);

// Bound on the smoothing error |exact count - smoothed count|:
//   (13.02/H)*n + 20.02*sqrt(2 H n) + 7H,
// with the conservative phi(n) <= n. Requires H > 1000 (the coefficient
// triple is only valid there). In witness_count_lower_bound the phi(n)
// term is folded into c1 instead; this standalone form exists for tests.
double smoothing_gap_bound(double n, u64 H);

// W(n) as in the file header, with phi(n) replaced by
// totient_lower_bound(n, P). Positive value = certified index 1 at n.
// Requires H > 1000.
double witness_count_lower_bound(double n, const BoundParams& params,
                                 const PrimeSet& P);

// Smallest n* with W(n) > 0 for all n >= n*, assuming the sign change on
// [1e6, 1e18] is unique (property-tested, W is eventually increasing).
struct ThresholdResult {
  PrimeSet prime_set;
  u64 H = 0;
  u64 n_star = 0;            // first integer past the root
  double margin_at_n_star = 0.0;  // W(n_star), small and positive
  double rounded = 0.0;           // round_up_2sf(n_star)
};

// Brackets the root by doubling from bracket_seed, then bisects on the
// geometric mean to machine precision; the result is independent of the
// seed as long as W(seed) < 0. Throws std::invalid_argument when
// c1(H) <= 0 and std::runtime_error when no sign change exists below 1e18.
ThresholdResult solve_threshold(const PrimeSet& P, u64 H,
                                double bracket_seed = 1e6);

// solve_threshold specialized to n a power of 5, where phi(n) = 4n/5
// exactly and no totient lower bound is needed.
ThresholdResult power_of_five_threshold(u64 H);

// The cutoff choice: integer minimizer of H / c1(H) over a grid, the
// stationary point 2*13.02/c0 of the smooth relaxation, and the default
// operating point H = 7000 used by every reported threshold.
struct CutoffChoice {
  u64 h_min = 0;            // grid minimizer of H/c1(H)
  double c1_at_min = 0.0;
  double ratio_at_min = 0.0;
  double h_stationary = 0.0;  // 2*13.02/c0
  u64 h_default = 7000;
  double c1_at_default = 0.0;
  double ratio_at_default = 0.0;
};

CutoffChoice optimize_cutoff();

// Rounds x > 0 up to 2 significant figures (4.50e13 -> 4.6e13).
double round_up_2sf(double x);

// One row of the threshold table: cumulative prime sets
// {2,3}, +7, +11, +13, +17, +19, plus the power-of-5 row.
struct ThresholdRow {
  std::string label;
  ThresholdResult result;
};

std::vector<ThresholdRow> threshold_table(u64 H);

}  // namespace zerosum
