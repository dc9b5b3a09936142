#include <benchmark/benchmark.h>

#include <pong/bound.hpp>
#include <pong/gausspoly.hpp>
#include <pong/mcoracle.hpp>
#include <pong/vlp.hpp>
#include <pong/wrench.hpp>

#include <cmath>
#include <vector>

namespace {

// Slightly irregular four-finger sphere grasp; irregular so the vertex
// programs stay nondegenerate and the analytic gradient path is exercised.
pong::GraspSpec bench_grasp() {
  pong::GraspSpec g;
  g.surface = pong::ImplicitSurface::make_sphere(pong::Vec3::Zero(), 1.0);
  const double s = 0.5773502691896258;
  const pong::Vec3 raw[4] = {{s + 0.11, s - 0.05, s},
                             {s, -s + 0.07, -s},
                             {-s, s, -s - 0.09},
                             {-s, -s + 0.03, s}};
  for (const pong::Vec3& p : raw) {
    pong::ContactSpec c;
    c.position = p.normalized();
    g.contacts.push_back(c);
  }
  g.mu = 0.5;
  g.n_sides = 4;
  g.n_dirs = 8;
  return g;
}

void BM_BoundEvaluate(benchmark::State& state) {
  pong::GraspSpec g = bench_grasp();
  g.n_dirs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto rep = pong::evaluate(g);
    benchmark::DoNotOptimize(rep.l_fc);
  }
}
BENCHMARK(BM_BoundEvaluate)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_BoundGradient(benchmark::State& state) {
  const pong::GraspSpec g = bench_grasp();
  for (auto _ : state) {
    pong::VecX grad = pong::gradient(g);
    benchmark::DoNotOptimize(grad.sum());
  }
}
BENCHMARK(BM_BoundGradient)->Unit(benchmark::kMillisecond);

void BM_PolygonMass(benchmark::State& state) {
  // Hexagon around a shifted Gaussian.
  std::vector<pong::Vec2> verts;
  for (int k = 0; k < 6; ++k) {
    const double a = 2.0 * M_PI * k / 6.0;
    verts.push_back({1.3 * std::cos(a) + 0.2, 1.1 * std::sin(a) - 0.1});
  }
  pong::PlanarGaussian gauss;
  gauss.mean = {0.15, -0.05};
  gauss.sigma1 = 0.7;
  gauss.sigma2 = 0.5;
  pong::QuadratureConfig qcfg;
  qcfg.nodes_per_edge = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto p = pong::polygon_probability(gauss, verts, qcfg);
    benchmark::DoNotOptimize(p.probability);
  }
}
BENCHMARK(BM_PolygonMass)->Arg(20)->Arg(40);

void BM_McOracle(benchmark::State& state) {
  const pong::WrenchModel m = pong::build_wrench_model(bench_grasp());
  pong::McConfig cfg;
  cfg.n_samples = static_cast<int>(state.range(0));
  cfg.seed = 99;
  for (auto _ : state) {
    auto est = pong::estimate_pfc(m, cfg);
    benchmark::DoNotOptimize(est.p_hat);
  }
}
BENCHMARK(BM_McOracle)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BuildPolygons(benchmark::State& state) {
  const pong::WrenchModel m = pong::build_wrench_model(bench_grasp());
  const auto dirs =
      pong::SearchDirections::uniform(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto build = pong::build_polygons(m, dirs);
    benchmark::DoNotOptimize(build.all_feasible);
  }
}
BENCHMARK(BM_BuildPolygons)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
