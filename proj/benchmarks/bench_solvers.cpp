// Solver throughput on seeded random instances. The enumeration oracle is
// included to make its exponential blowup visible next to the solvers.

#include <benchmark/benchmark.h>

#include "zrl/det_planner.hpp"
#include "zrl/model_free.hpp"
#include "zrl/oracle.hpp"
#include "zrl/stoch_planner.hpp"

namespace {

using namespace zrl;

SolverConfig default_cfg() {
    SolverConfig cfg;
    cfg.beta = 1.0;
    cfg.mu = -2.0;
    return cfg;
}

void bm_power_iteration(benchmark::State& state) {
    const Mdp m = random_mdp(static_cast<int>(state.range(0)), 3, 1, true, false, 7);
    const SolverConfig cfg = default_cfg();
    for (auto _ : state) benchmark::DoNotOptimize(z_power_iteration(m, cfg));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_power_iteration)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void bm_linear_solve(benchmark::State& state) {
    const Mdp m = random_mdp(static_cast<int>(state.range(0)), 3, 1, true, false, 7);
    const SolverConfig cfg = default_cfg();
    for (auto _ : state) benchmark::DoNotOptimize(z_linear_solve(m, cfg));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_linear_solve)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void bm_oracle_enumeration(benchmark::State& state) {
    const Mdp m = random_mdp(static_cast<int>(state.range(0)), 2, 1, true, true, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(enumerate_z(m, 0, 1.0, -2.0, m.n_states()));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_oracle_enumeration)->DenseRange(6, 18, 4)->Complexity();

void bm_variational_fixed_point(benchmark::State& state) {
    const Mdp m = random_mdp(static_cast<int>(state.range(0)), 2, 3, false, false, 7);
    const SolverConfig cfg = default_cfg();
    for (auto _ : state) benchmark::DoNotOptimize(variational_fixed_point(m, cfg));
}
BENCHMARK(bm_variational_fixed_point)->RangeMultiplier(4)->Range(16, 256);

void bm_learning_episodes(benchmark::State& state) {
    const Mdp m = random_mdp(64, 3, 1, true, false, 7);
    AgentConfig cfg;
    cfg.episodes = static_cast<int>(state.range(0));
    cfg.seed = 7;
    for (auto _ : state) benchmark::DoNotOptimize(run_episodes(m, cfg));
}
BENCHMARK(bm_learning_episodes)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
