#pragma once

#include <string>
#include <vector>

#include "gridars/policy.hpp"

namespace gridars {

/// The deployable artifact: policy weights plus the frozen observation
/// statistics they were trained with. Stored as a line-oriented text
/// file with hex-float values, so save/load round-trips bitwise.
struct PolicyBundle {
  PolicyParams params;
  RunningStats stats;
  std::string config_hash;
  // Plain-reward returns of the final policy on the training tasks,
  // recorded at the end of training.
  std::vector<double> final_returns;
};

void save_bundle(const std::string& path, const PolicyBundle& bundle);
PolicyBundle load_bundle(const std::string& path);

}  // namespace gridars
