#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gridars {

enum class Arch { linear, mlp_tanh };

std::string arch_name(Arch arch);
Arch arch_from_name(const std::string& name);

/// Flat parameter layout:
///   linear:   W (n_act x n_obs, row major), then bias (n_act)
///   mlp_tanh: W1 (hidden x n_obs), b1 (hidden), W2 (n_act x hidden),
///             b2 (n_act)
struct PolicyParams {
  Arch arch = Arch::linear;
  int n_obs = 0;
  int n_act = 0;
  int hidden = 32;  // used by mlp_tanh only
  std::vector<double> theta;

  static std::size_t param_count(Arch arch, int n_obs, int n_act, int hidden);
  static PolicyParams zeros(Arch arch, int n_obs, int n_act, int hidden = 32);
};

/// Raw network output squashed per component to -0.1 * (tanh(y) + 1),
/// which lies inside the [-0.2, 0] action box for any finite input.
std::vector<double> act(const PolicyParams& params,
                        std::span<const double> s_norm);

inline constexpr double kSigmaFloor = 1e-8;

/// Streaming per-dimension mean/variance accumulator (Welford), with the
/// standard parallel combine for merging executor-local deltas.
struct RunningStats {
  std::int64_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;  // sum of squared deviations

  RunningStats() = default;
  explicit RunningStats(std::size_t dim) : mean(dim, 0.0), m2(dim, 0.0) {}

  std::size_t dim() const { return mean.size(); }
  void update(std::span<const double> sample);
  void merge(const RunningStats& other);

  /// Population standard deviation per dimension (0 when count <= 1).
  std::vector<double> std_dev() const;
};

/// Elementwise (s - mean) / max(std, floor); with count <= 1 the
/// standard deviation is taken as 1.
std::vector<double> normalize(std::span<const double> s,
                              const RunningStats& stats);

}  // namespace gridars
