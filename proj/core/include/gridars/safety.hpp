#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

namespace gridars {

/// How the per-step plain reward is combined with the safety signal.
enum class Mode { constrained, barrier };

/// Weights and threshold tables for the shaped rewards and the
/// post-fault voltage recovery envelope.
struct RewardConfig {
  double c1 = 260.0;  // envelope-deficit weight
  double c2 = 150.0;  // shed-amount weight
  double c3 = 3.0;    // invalid-action weight
  double c4 = 0.01;   // barrier weight

  double lambda = 5.0;        // safety multiplier (constrained mode)
  double barrier_clamp = 1e6; // upper clamp for the barrier sum

  // Interval edges (seconds after fault clearance) and the envelope
  // lower bounds / safety bands on each of the four intervals.
  std::array<double, 3> tau_breaks{0.33, 0.5, 1.5};
  std::array<double, 4> levels{0.7, 0.8, 0.9, 0.95};
  std::array<double, 4> band_center{1.1, 1.15, 1.2, 1.225};
  std::array<double, 4> band_half{0.4, 0.35, 0.3, 0.275};

  // Failure branch: any voltage below fail_level this long after
  // clearance ends the episode with fail_penalty.
  double fail_after = 4.0;
  double fail_level = 0.95;
  double fail_penalty = -1000.0;
};

/// Index of the recovery interval containing tau (= t - T_clear).
/// Boundary points belong to the later interval.
std::size_t envelope_interval(double tau, const RewardConfig& cfg);

/// Time-dependent lower voltage bound after fault clearance.
double envelope_lower(double tau, const RewardConfig& cfg);

struct StepReward {
  double value = 0.0;
  bool terminal = false;
};

/// Per-step plain reward. `t_clear` is empty while the fault has not
/// cleared yet; pre-clearance steps contribute no envelope deficit.
StepReward step_reward(std::span<const double> voltages, double shed_pu,
                       int invalid_count, double t,
                       std::optional<double> t_clear,
                       const RewardConfig& cfg);

/// Band safety function: nonnegative iff every voltage lies inside the
/// interval's band [center - half, center + half]. Requires t > t_clear.
double safety_fn(std::span<const double> voltages, double t, double t_clear,
                 const RewardConfig& cfg);

/// Barrier penalty: sum of inverse squared distances to the envelope
/// lower bound, clamped at cfg.barrier_clamp. Requires t > t_clear.
double barrier_fn(std::span<const double> voltages, double t, double t_clear,
                  const RewardConfig& cfg);

double lagrangian_reward(double r, double f, double lambda);
double barrier_reward(double r, double barrier, double c4);

/// True iff any post-clearance safety value is negative, or the fault
/// never cleared within the episode (conservative).
bool check_violation(std::span<const double> post_clearance_safety,
                     bool fault_cleared);

}  // namespace gridars
