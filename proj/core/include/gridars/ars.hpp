#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridars/policy.hpp"
#include "gridars/safety.hpp"

namespace gridars {

struct ArsConfig {
  double alpha = 0.02;       // step size
  int n_dirs = 32;           // perturbation directions per iteration
  double nu = 0.03;          // exploration noise std
  int top_b = 16;            // elite directions kept for the update
  int rollouts_per_dir = 9;  // m; equal to the task-set size by default
  double decay = 0.997;      // per-iteration decay of alpha and nu
  int iterations = 500;      // H
  Mode mode = Mode::barrier;
  double lambda0 = 5.0;
  double lambda_min = 1e-3;
  double lambda_max = 1e4;
  std::uint64_t seed = 0;
  int executors = 1;
  Arch arch = Arch::linear;
  int hidden = 32;
  double theta_init_std = 0.01;
  // Offset added to the output-layer bias at initialization. The squash
  // a = -0.1*(tanh(y)+1) sheds fully as y -> +inf, so a negative offset
  // starts the policy near "no shed" and early exploration does not
  // disconnect load wholesale.
  double action_bias_init = -2.5;

  void validate() const;  // throws std::invalid_argument
};

struct IterationRecord {
  int iteration = 0;
  std::vector<std::pair<double, double>> scores;  // (R+, R-) per direction
  std::vector<int> selected;
  double sigma_b = 0.0;
  double lambda_before = 0.0;
  double lambda_after = 0.0;
  bool any_violation = false;
  int violation_count = 0;
  double best_return = 0.0;
  double mean_return = 0.0;
  double alpha = 0.0;
  double nu = 0.0;
  std::uint64_t theta_checksum = 0;
  bool rewards_finite = true;
  // min over rollout steps of combined - (r - c4 * barrier_clamp)
  double min_reward_margin = std::numeric_limits<double>::infinity();
};

/// What the learner needs back from one episode.
struct EpisodeOutcome {
  double combined_return = 0.0;
  double plain_return = 0.0;
  bool violated = false;
  bool finite = true;
  double min_reward_margin = std::numeric_limits<double>::infinity();
  RunningStats stats_delta;
};

/// Runs one episode of the given (perturbed) policy on one task with
/// frozen normalization statistics.
using EpisodeRunner = std::function<EpisodeOutcome(
    const PolicyParams& params, const RunningStats& frozen_stats,
    int task_index, double lambda, bool collect_stats)>;

std::vector<std::vector<double>> sample_directions(std::mt19937_64& rng,
                                                   int n_dirs,
                                                   std::size_t n_theta);

std::pair<std::vector<double>, std::vector<double>> perturb(
    std::span<const double> theta, std::span<const double> delta, double nu);

struct Selection {
  std::vector<int> indices;  // descending by max(R+, R-)
  double sigma_b = 0.0;      // population std of the 2b elite returns
};

Selection select_top(std::span<const std::pair<double, double>> scores, int b);

std::vector<double> update_weights(
    std::span<const double> theta,
    std::span<const std::pair<double, double>> scores,
    const std::vector<std::vector<double>>& deltas,
    std::span<const int> selected, double alpha, double sigma_b);

std::pair<double, double> decay(double alpha, double nu, double rate);

double update_lambda(double lambda, bool any_violation, double lambda_min,
                     double lambda_max);

std::uint64_t theta_checksum(std::span<const double> theta);

struct TrainResult {
  PolicyParams params;
  RunningStats stats;
  double lambda_final = 0.0;
  std::vector<IterationRecord> history;
};

/// Runs H iterations of safe ARS against the given episode runner.
/// `n_tasks` rollouts are executed per direction and sign. Progress
/// lines go to stdout when verbose.
TrainResult train(const ArsConfig& cfg, int n_obs, int n_act,
                  const EpisodeRunner& runner, int n_tasks,
                  bool verbose = false);

void write_history_csv(const std::string& path,
                       std::span<const IterationRecord> history,
                       double lambda0);

}  // namespace gridars
