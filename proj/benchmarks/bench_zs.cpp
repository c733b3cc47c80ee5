#include <benchmark/benchmark.h>

#include "zerosum/arith.hpp"
#include "zerosum/bounds.hpp"
#include "zerosum/verifier.hpp"

using namespace zerosum;

static void BM_unit_group(benchmark::State& state) {
  const u64 n = static_cast<u64>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(unit_group(n));
}
BENCHMARK(BM_unit_group)->Arg(99995)->Arg(999995);

// the production path: bitmap windows, segment sweep, fallback scan
static void BM_verify_modulus(benchmark::State& state) {
  const u64 n = static_cast<u64>(state.range(0));
  u64 candidates = 0;
  for (auto _ : state) {
    const VerifyReport r = verify_modulus(n);
    candidates = r.candidates_checked;
    benchmark::DoNotOptimize(r.counterexamples.size());
  }
  state.counters["candidates"] = static_cast<double>(candidates);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(candidates));
}
BENCHMARK(BM_verify_modulus)
    ->Arg(9995)
    ->Arg(99995)
    ->Unit(benchmark::kMillisecond);

// the reference path the sweep is tested against: stream + per-candidate
// witness scan
static void BM_reference_scan(benchmark::State& state) {
  const u64 n = static_cast<u64>(state.range(0));
  const UnitGroup units = unit_group(n);
  for (auto _ : state) {
    CandidateStream stream(units);
    u64 bad = 0;
    while (const auto s = stream.next())
      if (!check_candidate(*s, units)) ++bad;
    benchmark::DoNotOptimize(bad);
  }
}
BENCHMARK(BM_reference_scan)->Arg(9995)->Unit(benchmark::kMillisecond);

static void BM_index_of(benchmark::State& state) {
  const u64 n = 99995;
  const UnitGroup units = unit_group(n);
  CandidateStream stream(units);
  const Sequence4 s = *stream.next();
  for (auto _ : state) benchmark::DoNotOptimize(index_of(s, units));
}
BENCHMARK(BM_index_of);

static void BM_solve_threshold(benchmark::State& state) {
  const PrimeSet P = make_prime_set({2, 3});
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_threshold(P, 7000).n_star);
}
BENCHMARK(BM_solve_threshold);

BENCHMARK_MAIN();
