#include "gridars/rollout.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gridars {

EpisodeOutcome RolloutResult::outcome() const {
  EpisodeOutcome o;
  o.combined_return = combined_return;
  o.plain_return = plain_return;
  o.violated = violated;
  o.finite = rewards_finite && reason != TerminalReason::divergence;
  o.min_reward_margin = min_reward_margin;
  o.stats_delta = stats_delta;
  return o;
}

namespace {

// Shared closed-loop episode; the controller maps the current state to
// an action.
template <typename Controller>
RolloutResult run_loop(const GridConfig& grid, const FaultTask& task,
                       const RewardConfig& reward, Mode mode, double lambda,
                       const RolloutOptions& options, Controller&& control) {
  RolloutResult result;
  result.stats_delta = RunningStats(static_cast<std::size_t>(grid.n_obs()));
  try {
    EnvState state = init_scenario(grid, task);
    const int n_steps = static_cast<int>(
        std::round(grid.episode_length / grid.control_dt));
    for (int k = 0; k < n_steps; ++k) {
      const std::vector<double> action = control(state);
      const StepInfo info = step(state, action, grid, task);
      if (options.collect_stats) result.stats_delta.update(info.observation);

      double shed_total = 0.0;
      for (double s : info.shed) shed_total += s;
      result.total_shed += shed_total;

      std::vector<double> v_obs(grid.observed_buses.size());
      for (std::size_t i = 0; i < v_obs.size(); ++i) {
        v_obs[i] = state.voltages[grid.observed_buses[i]];
      }

      const StepReward r = step_reward(v_obs, shed_total, info.invalid_count,
                                       state.t, state.t_clear, reward);
      double combined = r.value;
      double f = std::numeric_limits<double>::quiet_NaN();
      double barrier = std::numeric_limits<double>::quiet_NaN();
      if (state.t_clear && state.t > *state.t_clear) {
        f = safety_fn(v_obs, state.t, *state.t_clear, reward);
        barrier = barrier_fn(v_obs, state.t, *state.t_clear, reward);
        result.min_safety = std::min(result.min_safety, f);
        combined = mode == Mode::constrained
                       ? lagrangian_reward(r.value, f, lambda)
                       : barrier_reward(r.value, barrier, reward.c4);
      }
      if (!std::isfinite(combined)) result.rewards_finite = false;
      result.min_reward_margin =
          std::min(result.min_reward_margin,
                   combined - (r.value - reward.c4 * reward.barrier_clamp));

      result.plain_return += r.value;
      result.combined_return += combined;

      if (options.record_trajectory) {
        StepRecord rec;
        rec.t = state.t;
        rec.observed_voltage = v_obs;
        rec.remaining = state.remaining;
        rec.action = action;
        rec.shed = info.shed;
        rec.invalid_count = info.invalid_count;
        rec.reward = r.value;
        rec.safety = f;
        rec.barrier = barrier;
        rec.combined = combined;
        result.trajectory.push_back(std::move(rec));
      }
      if (r.terminal) {
        result.reason = TerminalReason::penalty;
        break;
      }
    }
    result.fault_cleared = state.t_clear.has_value();
  } catch (const SimulationDiverged&) {
    result.reason = TerminalReason::divergence;
    result.combined_return = -1e9;
    result.plain_return = -1e9;
    result.violated = true;
    return result;
  }
  result.violated = !result.fault_cleared ||
                    (std::isfinite(result.min_safety) && result.min_safety < 0.0);
  return result;
}

}  // namespace

RolloutResult run_episode(const GridConfig& grid, const FaultTask& task,
                          const PolicyParams& params,
                          const RunningStats& frozen_stats,
                          const RewardConfig& reward, Mode mode, double lambda,
                          const RolloutOptions& options) {
  return run_loop(grid, task, reward, mode, lambda, options,
                  [&](const EnvState& state) {
                    const auto obs = observation(state, grid);
                    const auto s_norm = normalize(obs, frozen_stats);
                    return act(params, s_norm);
                  });
}

RolloutResult run_episode_uvls(const GridConfig& grid, const FaultTask& task,
                               const RewardConfig& reward,
                               const UvlsConfig& uvls,
                               bool record_trajectory) {
  UvlsController controller(grid, uvls);
  RolloutOptions options;
  options.record_trajectory = record_trajectory;
  return run_loop(grid, task, reward, Mode::barrier, 0.0, options,
                  [&](const EnvState& state) { return controller.action(state); });
}

EpisodeRunner make_grid_runner(const GridConfig& grid,
                               const RewardConfig& reward, Mode mode,
                               std::vector<FaultTask> tasks) {
  return [&grid, &reward, mode, tasks = std::move(tasks)](
             const PolicyParams& params, const RunningStats& frozen,
             int task_index, double lambda, bool collect_stats) {
    if (task_index < 0 || task_index >= static_cast<int>(tasks.size()))
      throw std::out_of_range("task index out of range");
    RolloutOptions options;
    options.collect_stats = collect_stats;
    return run_episode(grid, tasks[task_index], params, frozen, reward, mode,
                       lambda, options)
        .outcome();
  };
}

IterationEval evaluate_iteration(const PolicyParams& base,
                                 const std::vector<std::vector<double>>& deltas,
                                 double nu, const RunningStats& frozen_stats,
                                 std::span<const int> task_indices,
                                 double lambda, const EpisodeRunner& runner,
                                 int executor_count, bool collect_stats) {
  const int n_dirs = static_cast<int>(deltas.size());
  const int m = static_cast<int>(task_indices.size());
  const int n_jobs = 2 * n_dirs * m;
  std::vector<EpisodeOutcome> outcomes(n_jobs);

  // Job index layout: ((dir * 2) + sign) * m + task.
  auto run_job = [&](int idx) {
    const int task_slot = idx % m;
    const int sign = (idx / m) % 2;
    const int dir = idx / (2 * m);
    PolicyParams p = base;
    auto [plus, minus] = perturb(base.theta, deltas[dir], nu);
    p.theta = sign == 0 ? std::move(plus) : std::move(minus);
    outcomes[idx] = runner(p, frozen_stats, task_indices[task_slot], lambda,
                           collect_stats);
  };

  if (executor_count <= 1 || n_jobs <= 1) {
    for (int i = 0; i < n_jobs; ++i) run_job(i);
  } else {
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const int idx = next.fetch_add(1, std::memory_order_relaxed);
        if (idx >= n_jobs || failed.load(std::memory_order_relaxed)) break;
        try {
          run_job(idx);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
          break;
        }
      }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(executor_count, n_jobs);
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  IterationEval eval;
  eval.scores.resize(n_dirs);
  eval.merged_delta = RunningStats(frozen_stats.dim());
  for (int dir = 0; dir < n_dirs; ++dir) {
    double sum_plus = 0.0, sum_minus = 0.0;
    for (int sign = 0; sign < 2; ++sign) {
      for (int k = 0; k < m; ++k) {
        const auto& o = outcomes[((dir * 2) + sign) * m + k];
        (sign == 0 ? sum_plus : sum_minus) += o.combined_return;
        eval.any_violation |= o.violated;
        eval.violation_count += o.violated ? 1 : 0;
        eval.rewards_finite &= o.finite;
        eval.min_reward_margin =
            std::min(eval.min_reward_margin, o.min_reward_margin);
        eval.merged_delta.merge(o.stats_delta);
      }
    }
    eval.scores[dir] = {sum_plus / m, sum_minus / m};
  }
  return eval;
}

}  // namespace gridars
