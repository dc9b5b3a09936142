#include <benchmark/benchmark.h>

#include <pong/rng.hpp>
#include <pong/simplex.hpp>

namespace {

pong::LinearProgram random_lp(std::uint64_t seed, int m, int n) {
  pong::CounterRng rng(seed, 0);
  std::uint64_t k = 0;
  pong::LinearProgram lp;
  lp.eq_matrix.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) lp.eq_matrix(i, j) = rng.normal(k++);
  pong::VecX x0(n);
  for (int j = 0; j < n; ++j) x0[j] = rng.uniform(k++);
  lp.eq_rhs = lp.eq_matrix * x0;
  lp.objective.resize(n);
  for (int j = 0; j < n; ++j) lp.objective[j] = rng.normal(k++);
  return lp;
}

void BM_SimplexSolve(benchmark::State& state) {
  const auto lp = random_lp(11, static_cast<int>(state.range(0)),
                            static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto sol = pong::solve(lp);
    benchmark::DoNotOptimize(sol.objective_value);
  }
}
BENCHMARK(BM_SimplexSolve)->Args({7, 13})->Args({19, 25});

void BM_FeasibilityHotPath(benchmark::State& state) {
  const auto lp = random_lp(13, 7, static_cast<int>(state.range(0)));
  pong::SimplexWorkspace ws;
  for (auto _ : state) {
    auto st = pong::feasibility(lp.eq_matrix, lp.eq_rhs, ws);
    benchmark::DoNotOptimize(st);
  }
}
BENCHMARK(BM_FeasibilityHotPath)->Arg(12)->Arg(24);

}  // namespace

BENCHMARK_MAIN();
