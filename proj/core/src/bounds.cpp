#include "zerosum/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace zerosum {

namespace {

constexpr double kSmoothingPerH = 13.02;   // coefficient of phi(n)/H
constexpr double kSmoothingSqrt = 20.02;   // coefficient of sqrt(2Hn)
constexpr double kSmoothingLinear = 7.0;   // coefficient of H
constexpr double kRosser = 2.50637;
constexpr double kPairConstantRounded = 0.079021;  // 6-digit round-up

double loglog(double x) {
  if (x <= 1.0) throw std::domain_error("loglog: argument must exceed e");
  const double ll = std::log(std::log(x));
  if (ll <= 0.0) throw std::domain_error("loglog: argument must exceed e");
  return ll;
}

void require_big_cutoff(u64 H) {
  if (H <= 1000)
    throw std::domain_error("cutoff H must exceed 1000 for the smoothing "
                            "error coefficients to be valid");
}

// The harmonic factor of the tail bound: (2/pi)(harm(2t)-harm(t)/2).
double tail_harmonic_factor(u64 theta) {
  return (2.0 / std::numbers::pi) *
         (harmonic(2 * theta) - 0.5 * harmonic(theta));
}

}  // namespace

std::string PrimeSet::label() const {
  std::string out = "{";
  for (std::size_t i = 0; i < primes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(primes[i]);
  }
  out += '}';
  return out;
}

PrimeSet make_prime_set(std::vector<u64> primes) {
  std::sort(primes.begin(), primes.end());
  PrimeSet P;
  for (u64 p : primes) {
    if (p < 2) throw std::invalid_argument("prime set entries must be >= 2");
    if (!P.primes.empty() && P.primes.back() == p)
      throw std::invalid_argument("prime set entries must be distinct");
    const auto f = factorize(p);
    if (f.size() != 1 || f[0].second != 1)
      throw std::invalid_argument(std::to_string(p) + " is not prime");
    P.primes.push_back(p);
    P.product *= p;
    P.phi_of_product *= p - 1;
  }
  return P;
}

double aligned_pair_constant() {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return 9.0 / (16.0 * pi2) + 0.25 - 9.0 / (4.0 * pi2);
}

BoundParams make_params(u64 H) {
  if (H == 0) throw std::domain_error("cutoff H must be >= 1");
  BoundParams p;
  p.H = H;
  p.theta = (H + 1) / 2;
  p.c0 = 0.125 - 0.5 * (2.0 * kPairConstantRounded + 1.0 / 12.0);
  p.c1 = p.c0 - kSmoothingPerH / static_cast<double>(H);
  p.gamma = std::numbers::egamma;
  p.rosser_const = kRosser;
  return p;
}

double residual_pair_bound(double n, u64 H, bool special) {
  const double h = static_cast<double>(H);
  return std::sqrt(2.0 * h * h * n) / (special ? 12.0 : 4.0);
}

double tail_pair_bound(double n, u64 H) {
  const double f = tail_harmonic_factor((H + 1) / 2);
  return std::sqrt(2.0 * static_cast<double>(H) * n) * f * f;
}

double totient_lower_bound(double n, const PrimeSet& P) {
  const double np = n * static_cast<double>(P.product);
  const double ll = loglog(np);
  const double denom = std::exp(std::numbers::egamma) * ll + kRosser / ll;
  return np / (static_cast<double>(P.phi_of_product) * denom);
}

double smoothing_gap_bound(double n, u64 H) {
  require_big_cutoff(H);
  const double h = static_cast<double>(H);
  return kSmoothingPerH / h * n + kSmoothingSqrt * std::sqrt(2.0 * h * n) +
         kSmoothingLinear * h;
}

namespace {

// W(n) with an arbitrary totient lower bound, so the power-of-5 case can
// substitute the exact 4n/5.
double witness_bound_with_phi(double n, double phi_lower,
                              const BoundParams& params) {
  require_big_cutoff(params.H);
  const double h = static_cast<double>(params.H);
  const double f = tail_harmonic_factor(params.theta);
  return params.c1 * phi_lower - (7.0 / 24.0) * std::sqrt(2.0 * h * h * n) -
         (1.5 * f * f + kSmoothingSqrt) * std::sqrt(2.0 * h * n) -
         kSmoothingLinear * h;
}

template <typename F>
ThresholdResult solve_root(F&& w, u64 H, double seed) {
  const BoundParams params = make_params(H);
  if (params.c1 <= 0.0)
    throw std::invalid_argument(
        "c1(H) <= 0: the cutoff must exceed 13.02/c0 (~3020) for the main "
        "term to survive");

  double lo = seed;
  double hi = lo;
  if (w(lo) > 0.0)
    throw std::runtime_error("bound already positive at the bracket seed; "
                             "start lower");
  while (w(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e18)
      throw std::runtime_error("no sign change found below 1e18");
  }
  lo = hi / 2.0;
  // geometric bisection: the root sits at ~1e13, absolute steps are useless
  for (int it = 0; it < 200 && hi - lo > 0.5; ++it) {
    const double mid = std::sqrt(lo * hi);
    (w(mid) > 0.0 ? hi : lo) = mid;
  }

  ThresholdResult r;
  r.H = H;
  r.n_star = static_cast<u64>(std::ceil(hi));
  const double ns = static_cast<double>(r.n_star);
  r.margin_at_n_star = w(ns);
  // the sign just past the root must be robust to last-bit perturbation
  if (!(w(ns * (1.0 + 1e-12)) > 0.0))
    throw std::runtime_error("threshold not numerically stable at n*");
  r.rounded = round_up_2sf(ns);
  return r;
}

}  // namespace

double witness_count_lower_bound(double n, const BoundParams& params,
                                 const PrimeSet& P) {
  return witness_bound_with_phi(n, totient_lower_bound(n, P), params);
}

ThresholdResult solve_threshold(const PrimeSet& P, u64 H,
                                double bracket_seed) {
  const BoundParams params = make_params(H);
  ThresholdResult r = solve_root(
      [&](double n) { return witness_count_lower_bound(n, params, P); }, H,
      bracket_seed);
  r.prime_set = P;
  return r;
}

ThresholdResult power_of_five_threshold(u64 H) {
  const BoundParams params = make_params(H);
  ThresholdResult r = solve_root(
      [&](double n) { return witness_bound_with_phi(n, 0.8 * n, params); },
      H, 1e6);
  r.prime_set = make_prime_set({5});
  return r;
}

CutoffChoice optimize_cutoff() {
  CutoffChoice c;
  const double c0 = make_params(1).c0;
  c.h_stationary = 2.0 * kSmoothingPerH / c0;

  double best = std::numeric_limits<double>::infinity();
  const u64 h_lo = static_cast<u64>(kSmoothingPerH / c0) + 1;
  for (u64 h = h_lo; h <= 20000; ++h) {
    const BoundParams p = make_params(h);
    if (p.c1 <= 0.0) continue;
    const double ratio = static_cast<double>(h) / p.c1;
    if (ratio < best) {
      best = ratio;
      c.h_min = h;
      c.c1_at_min = p.c1;
    }
  }
  c.ratio_at_min = best;

  const BoundParams d = make_params(c.h_default);
  c.c1_at_default = d.c1;
  c.ratio_at_default = static_cast<double>(c.h_default) / d.c1;
  return c;
}

double round_up_2sf(double x) {
  if (!(x > 0.0)) throw std::domain_error("round_up_2sf: x must be positive");
  const double e = std::floor(std::log10(x));
  const double scale = std::pow(10.0, e - 1.0);
  // back off one ulp-ish so exact 2-digit inputs round to themselves
  const double mantissa = std::ceil(x / scale - 1e-9);
  return mantissa * scale;
}

std::vector<ThresholdRow> threshold_table(u64 H) {
  std::vector<ThresholdRow> rows;
  std::vector<u64> primes = {2, 3};
  auto add = [&] {
    PrimeSet P = make_prime_set(primes);
    rows.push_back({P.label(), solve_threshold(P, H)});
  };
  add();
  for (u64 p : {7, 11, 13, 17, 19}) {
    primes.push_back(p);
    add();
  }
  rows.push_back({"5^k", power_of_five_threshold(H)});
  return rows;
}

}  // namespace zerosum
