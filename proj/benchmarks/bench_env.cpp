#include <benchmark/benchmark.h>

#include <vector>

#include "gridars/grid_env.hpp"
#include "gridars/ieee39.hpp"
#include "gridars/policy.hpp"
#include "gridars/rollout.hpp"

namespace {

using namespace gridars;

void BM_EnvStep(benchmark::State& state) {
  const GridConfig cfg = make_ieee39_surrogate();
  const FaultTask task{3, 1.0, 0.28};
  EnvState env = init_scenario(cfg, task);
  const std::vector<double> action(cfg.load_buses.size(), -0.01);
  for (auto _ : state) {
    StepInfo info = step(env, action, cfg, task);
    benchmark::DoNotOptimize(info.observation.data());
    if (env.t >= cfg.episode_length) env = init_scenario(cfg, task);
  }
}
BENCHMARK(BM_EnvStep);

void BM_Episode(benchmark::State& state) {
  const GridConfig cfg = make_ieee39_surrogate();
  const RewardConfig reward;
  const FaultTask task{3, 1.0, 0.28};
  PolicyParams params = PolicyParams::zeros(Arch::linear, cfg.n_obs(),
                                            cfg.n_load());
  const RunningStats stats(cfg.n_obs());
  for (auto _ : state) {
    RolloutResult res = run_episode(cfg, task, params, stats, reward,
                                    Mode::barrier, 0.0);
    benchmark::DoNotOptimize(res.combined_return);
  }
}
BENCHMARK(BM_Episode);

void BM_EpisodeUvls(benchmark::State& state) {
  const GridConfig cfg = make_ieee39_surrogate();
  const RewardConfig reward;
  const FaultTask task{3, 1.0, 0.28};
  for (auto _ : state) {
    RolloutResult res =
        run_episode_uvls(cfg, task, reward, UvlsConfig{}, false);
    benchmark::DoNotOptimize(res.total_shed);
  }
}
BENCHMARK(BM_EpisodeUvls);

void BM_NetworkEquilibrium(benchmark::State& state) {
  const GridConfig cfg = make_ieee39_surrogate();
  const FaultTask task{3, 1.0, 0.0};
  for (auto _ : state) {
    EnvState env = init_scenario(cfg, task);
    benchmark::DoNotOptimize(env.voltages.data());
  }
}
BENCHMARK(BM_NetworkEquilibrium);

}  // namespace

BENCHMARK_MAIN();
