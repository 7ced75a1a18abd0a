#include <benchmark/benchmark.h>

#include <cmath>

#include "robust_affine/arbitrage.hpp"
#include "robust_affine/claims.hpp"
#include "robust_affine/riccati.hpp"
#include "robust_affine/simulation.hpp"

using namespace robust_affine;

namespace {

const ParameterBox kCir({0.02, 0.03}, {-0.3, -0.1}, {0, 0}, {0.01, 0.02});
const ParameterBox kVasicek({0.02, 0.04}, {-0.3, -0.3}, {0.01, 0.02}, {0, 0});

void BM_RiccatiCir(benchmark::State& state) {
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) {
    auto sol = solve_riccati(kCir, StateSpace::NonNegative, 10.0, 0.0, tol);
    benchmark::DoNotOptimize(sol.psi(10.0));
  }
}
BENCHMARK(BM_RiccatiCir)->Arg(6)->Arg(8)->Arg(10);

void BM_SimulateExtremal(benchmark::State& state) {
  SimulationSpec s;
  s.x0 = 0.05;
  s.dt = 1e-3;
  s.n_paths = static_cast<std::size_t>(state.range(0));
  s.threads = 1;
  for (auto _ : state) {
    auto e = simulate_extremal(kVasicek, StateSpace::RealLine, s);
    benchmark::DoNotOptimize(e.values.data().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_SimulateExtremal)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_HazardAndBond(benchmark::State& state) {
  SimulationSpec s;
  s.x0 = 0.03;
  s.dt = 1e-3;
  s.n_paths = 10000;
  const auto e = simulate_extremal(kCir, StateSpace::NonNegative, s);
  for (auto _ : state) {
    const auto h = hazard_integral(e);
    benchmark::DoNotOptimize(mc_bond_estimate(h, 0.0, 1.0).mean);
  }
}
BENCHMARK(BM_HazardAndBond)->Unit(benchmark::kMillisecond);

void BM_GPde(benchmark::State& state) {
  GPdeProblem p{TabulatedFunction({0.0, 1.0, 2.0}, {0.0, 0.0, 1.0})};
  p.sigma = TabulatedFunction::linear(1.0);
  p.vol_bounds = {0.01, 0.04};
  p.grid = AssetGrid{0.0, 3.0, static_cast<int>(state.range(0)), 1.0, 1.0};
  p.grid.dt = 0.5 * max_stable_dt(p);
  for (auto _ : state) {
    auto v = solve_g_pde(p);
    benchmark::DoNotOptimize(v.value_at(0.0, 1.0));
  }
}
BENCHMARK(BM_GPde)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_WealthProcess(benchmark::State& state) {
  SimulationSpec s;
  s.x0 = 0.03;
  s.dt = 0.01;
  s.n_paths = 2000;
  const auto sol = solve_riccati(kCir, StateSpace::NonNegative, 1.0, 0.0, 1e-8);
  const auto market = longevity_market(simulate_extremal(kCir, StateSpace::NonNegative, s), sol, 1.0, 1.0, 0.2, 1);
  const auto family = random_long_only_strategies(16, market.time_grid, 3);
  for (auto _ : state) {
    for (const auto& strat : family) benchmark::DoNotOptimize(wealth_process(strat, market, 1.0).admissible);
  }
}
BENCHMARK(BM_WealthProcess)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
