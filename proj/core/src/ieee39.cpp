#include "gridars/ieee39.hpp"

#include <cmath>
#include <queue>

namespace gridars {

const std::vector<std::pair<int, int>>& ieee39_edges() {
  static const std::vector<std::pair<int, int>> edges = {
      {1, 2},   {1, 39},  {2, 3},   {2, 25},  {2, 30},  {3, 4},   {3, 18},
      {4, 5},   {4, 14},  {5, 6},   {5, 8},   {6, 7},   {6, 11},  {6, 31},
      {7, 8},   {8, 9},   {9, 39},  {10, 11}, {10, 13}, {10, 32}, {12, 11},
      {12, 13}, {13, 14}, {14, 15}, {15, 16}, {16, 17}, {16, 19}, {16, 21},
      {16, 24}, {17, 18}, {17, 27}, {19, 20}, {19, 33}, {20, 34}, {21, 22},
      {22, 23}, {22, 35}, {23, 24}, {23, 36}, {25, 26}, {25, 37}, {26, 27},
      {26, 28}, {26, 29}, {28, 29}, {29, 38}};
  return edges;
}

std::vector<std::vector<int>> hop_distances(
    int n_bus, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n_bus);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::vector<int>> dist(n_bus, std::vector<int>(n_bus, -1));
  for (int src = 0; src < n_bus; ++src) {
    std::queue<int> q;
    dist[src][src] = 0;
    q.push(src);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (dist[src][v] < 0) {
          dist[src][v] = dist[src][u] + 1;
          q.push(v);
        }
      }
    }
  }
  return dist;
}

GridConfig make_ieee39_surrogate(const SurrogateParams& params) {
  constexpr int kNBus = 39;
  std::vector<std::pair<int, int>> edges0;
  edges0.reserve(ieee39_edges().size());
  for (auto [a, b] : ieee39_edges()) edges0.emplace_back(a - 1, b - 1);
  const auto dist = hop_distances(kNBus, edges0);

  GridConfig cfg;
  cfg.n_bus = kNBus;
  for (int b : params.load_buses) cfg.load_buses.push_back(b - 1);
  cfg.initial_load = params.initial_load;
  for (int b : params.observed_buses) cfg.observed_buses.push_back(b - 1);
  cfg.load = params.load;
  cfg.sim_dt = params.sim_dt;
  cfg.control_dt = params.control_dt;
  cfg.episode_length = params.episode_length;

  cfg.sensitivity.assign(kNBus, std::vector<double>(cfg.load_buses.size()));
  for (int i = 0; i < kNBus; ++i) {
    for (std::size_t k = 0; k < cfg.load_buses.size(); ++k) {
      const int d = dist[i][cfg.load_buses[k]];
      cfg.sensitivity[i][k] =
          d < 0 ? 0.0 : params.s0 * std::exp(-d / params.d0);
    }
  }

  cfg.fault_depression.assign(kNBus, std::vector<double>(kNBus, 1.0));
  for (int fb = 0; fb < kNBus; ++fb) {
    for (int i = 0; i < kNBus; ++i) {
      const int d = dist[fb][i];
      if (d < 0) continue;
      cfg.fault_depression[fb][i] =
          1.0 - (1.0 - params.phi_min) * std::exp(-d / params.phi_d0);
    }
  }

  cfg.calibrate_noload_voltage();
  return cfg;
}

}  // namespace gridars
