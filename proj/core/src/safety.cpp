#include "gridars/safety.hpp"

#include <algorithm>
#include <cmath>

namespace gridars {

std::size_t envelope_interval(double tau, const RewardConfig& cfg) {
  for (std::size_t i = 0; i < cfg.tau_breaks.size(); ++i) {
    if (tau < cfg.tau_breaks[i]) return i;
  }
  return cfg.tau_breaks.size();
}

double envelope_lower(double tau, const RewardConfig& cfg) {
  return cfg.levels[envelope_interval(tau, cfg)];
}

StepReward step_reward(std::span<const double> voltages, double shed_pu,
                       int invalid_count, double t,
                       std::optional<double> t_clear,
                       const RewardConfig& cfg) {
  if (t_clear && t > *t_clear + cfg.fail_after) {
    for (double v : voltages) {
      if (v < cfg.fail_level) return {cfg.fail_penalty, true};
    }
  }
  double deficit = 0.0;
  if (t_clear && t > *t_clear) {
    const double lower = envelope_lower(t - *t_clear, cfg);
    for (double v : voltages) deficit += std::min(v - lower, 0.0);
  }
  return {cfg.c1 * deficit - cfg.c2 * shed_pu - cfg.c3 * invalid_count, false};
}

double safety_fn(std::span<const double> voltages, double t, double t_clear,
                 const RewardConfig& cfg) {
  const std::size_t k = envelope_interval(t - t_clear, cfg);
  const double c = cfg.band_center[k];
  const double h = cfg.band_half[k];
  double worst = 0.0;
  for (double v : voltages) worst = std::max(worst, (v - c) * (v - c));
  return h * h - worst;
}

double barrier_fn(std::span<const double> voltages, double t, double t_clear,
                  const RewardConfig& cfg) {
  const double lower = envelope_lower(t - t_clear, cfg);
  double sum = 0.0;
  for (double v : voltages) {
    const double gap = v - lower;
    if (gap <= 0.0) return cfg.barrier_clamp;
    sum += 1.0 / (gap * gap);
  }
  return std::min(sum, cfg.barrier_clamp);
}

double lagrangian_reward(double r, double f, double lambda) {
  return r + lambda * f;
}

double barrier_reward(double r, double barrier, double c4) {
  return r - c4 * barrier;
}

bool check_violation(std::span<const double> post_clearance_safety,
                     bool fault_cleared) {
  if (!fault_cleared) return true;
  return std::any_of(post_clearance_safety.begin(),
                     post_clearance_safety.end(),
                     [](double f) { return f < 0.0; });
}

}  // namespace gridars
