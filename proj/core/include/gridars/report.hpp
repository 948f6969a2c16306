#pragma once

#include <string>
#include <vector>

#include "gridars/grid_env.hpp"
#include "gridars/rollout.hpp"

namespace gridars {

/// One row of the verdict table emitted by eval/baseline.
struct Verdict {
  int fault_bus = 0;  // 0-based
  double fault_duration = 0.0;
  bool violated = false;
  double min_safety = 0.0;
  double total_shed = 0.0;
  double plain_return = 0.0;
};

void write_trajectory_csv(const std::string& path, const RolloutResult& result,
                          const GridConfig& grid,
                          const std::optional<double>& t_clear);
void write_verdicts_csv(const std::string& path,
                        const std::vector<Verdict>& verdicts);
std::vector<Verdict> read_verdicts_csv(const std::string& path);

/// Joined RL-vs-UVLS comparison table; also returned as text.
std::string write_comparison_csv(const std::string& path,
                                 const std::vector<Verdict>& rl,
                                 const std::vector<Verdict>& uvls);

struct TrajectoryData {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

TrajectoryData read_trajectory_csv(const std::string& path);

/// Voltage trajectories with the stepped recovery envelope overlaid;
/// crossings below the envelope are marked.
void write_svg_plot(const std::string& path, const TrajectoryData& data,
                    const RewardConfig& reward);

}  // namespace gridars
