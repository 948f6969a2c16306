#pragma once

#include <limits>
#include <string>
#include <vector>

#include "gridars/ars.hpp"
#include "gridars/grid_env.hpp"
#include "gridars/policy.hpp"
#include "gridars/safety.hpp"

namespace gridars {

enum class TerminalReason { horizon, penalty, divergence };

struct StepRecord {
  double t = 0.0;
  std::vector<double> observed_voltage;
  std::vector<double> remaining;  // load fraction per load bus
  std::vector<double> action;
  std::vector<double> shed;
  int invalid_count = 0;
  double reward = 0.0;
  // NaN before fault clearance.
  double safety = std::numeric_limits<double>::quiet_NaN();
  double barrier = std::numeric_limits<double>::quiet_NaN();
  double combined = 0.0;
};

struct RolloutResult {
  double combined_return = 0.0;
  double plain_return = 0.0;
  std::vector<StepRecord> trajectory;
  double min_safety = std::numeric_limits<double>::infinity();
  bool fault_cleared = false;
  bool violated = false;
  double total_shed = 0.0;
  TerminalReason reason = TerminalReason::horizon;
  RunningStats stats_delta;
  bool rewards_finite = true;
  double min_reward_margin = std::numeric_limits<double>::infinity();

  EpisodeOutcome outcome() const;
};

struct RolloutOptions {
  bool collect_stats = false;
  bool record_trajectory = false;
};

/// One closed-loop episode of the policy on one fault task. Observation
/// statistics stay frozen for action inference; raw observations are
/// accumulated into stats_delta when requested. A diverged simulation
/// yields reason = divergence and a -1e9 return instead of propagating.
RolloutResult run_episode(const GridConfig& grid, const FaultTask& task,
                          const PolicyParams& params,
                          const RunningStats& frozen_stats,
                          const RewardConfig& reward, Mode mode, double lambda,
                          const RolloutOptions& options = {});

/// Same episode loop driven by the rule-based UVLS relay.
RolloutResult run_episode_uvls(const GridConfig& grid, const FaultTask& task,
                               const RewardConfig& reward,
                               const UvlsConfig& uvls = {},
                               bool record_trajectory = true);

/// Episode runner over a fixed task list, for ars::train.
EpisodeRunner make_grid_runner(const GridConfig& grid,
                               const RewardConfig& reward, Mode mode,
                               std::vector<FaultTask> tasks);

struct IterationEval {
  std::vector<std::pair<double, double>> scores;  // per direction
  bool any_violation = false;
  int violation_count = 0;
  RunningStats merged_delta;
  bool rewards_finite = true;
  double min_reward_margin = std::numeric_limits<double>::infinity();
};

/// Fans the 2 * N * m rollouts of one iteration over an executor pool.
/// Results are merged in (direction, sign, task) order, so the output is
/// bitwise identical for any executor count.
IterationEval evaluate_iteration(const PolicyParams& base,
                                 const std::vector<std::vector<double>>& deltas,
                                 double nu, const RunningStats& frozen_stats,
                                 std::span<const int> task_indices,
                                 double lambda, const EpisodeRunner& runner,
                                 int executor_count, bool collect_stats);

}  // namespace gridars
