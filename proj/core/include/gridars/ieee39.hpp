#pragma once

#include <utility>
#include <vector>

#include "gridars/grid_env.hpp"

namespace gridars {

/// Branch list of the IEEE 39-bus test system (1-based bus numbers).
const std::vector<std::pair<int, int>>& ieee39_edges();

/// All-pairs hop distances over an undirected edge list (0-based).
std::vector<std::vector<int>> hop_distances(
    int n_bus, const std::vector<std::pair<int, int>>& edges);

/// Parameters of the reduced-order 39-bus surrogate. Sensitivities decay
/// exponentially with hop distance, S_ij = s0 * exp(-d_ij / d0); fault
/// depression is phi_min at the faulted bus rising toward 1 with
/// distance scale phi_d0.
struct SurrogateParams {
  double s0 = 0.20;
  double d0 = 1.4;
  double phi_min = 0.05;
  double phi_d0 = 3.0;
  std::vector<int> load_buses{4, 7, 18};        // 1-based
  std::vector<double> initial_load{5.0, 2.338, 1.58};
  std::vector<int> observed_buses{4, 7, 8, 18};  // 1-based
  LoadModel load{0.0, 2.0, 0.6};
  double sim_dt = 0.01;
  double control_dt = 0.1;
  double episode_length = 8.0;
};

GridConfig make_ieee39_surrogate(const SurrogateParams& params = {});

}  // namespace gridars
