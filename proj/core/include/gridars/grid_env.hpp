#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridars {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Action box for per-bus shed commands; more negative sheds more.
inline constexpr double kActionMin = -0.2;
inline constexpr double kActionMax = 0.0;
// Commands below this count as a shedding request for invalid-action
// accounting.
inline constexpr double kShedRequestThreshold = -0.01;

// The algebraic network solve uses fixed-size scratch buffers.
inline constexpr int kMaxLoadBuses = 8;

/// Exponential-recovery dynamic load model:
///   t_p * dx/dt = -x + P0 * p * (V^alpha_s - V^alpha_t)
///   demand      =  x + P0 * p * V^alpha_t
struct LoadModel {
  double alpha_s = 0.0;
  double alpha_t = 2.0;
  double t_p = 0.4;  // seconds
};

/// One training/evaluation scenario. Duration 0 means no fault is ever
/// applied; clearance time is still defined at fault_start.
struct FaultTask {
  int fault_bus = 0;  // 0-based
  double fault_start = 1.0;
  double fault_duration = 0.0;
};

struct GridConfig {
  int n_bus = 0;
  std::vector<int> load_buses;          // 0-based bus indices
  std::vector<double> initial_load;     // P0 per load bus, p.u.
  std::vector<int> observed_buses;      // 0-based
  // n_bus rows x n_load cols, p.u. voltage drop per p.u. load.
  std::vector<std::vector<double>> sensitivity;
  std::vector<double> noload_voltage;   // per bus
  // fault_depression[fault_bus][bus], multiplicative, in (0, 1].
  std::vector<std::vector<double>> fault_depression;
  LoadModel load;
  double sim_dt = 0.01;
  double control_dt = 0.1;
  double episode_length = 8.0;

  int n_load() const { return static_cast<int>(load_buses.size()); }
  int n_obs() const {
    return static_cast<int>(observed_buses.size() + load_buses.size());
  }

  /// Sets noload_voltage so the no-fault, no-shed equilibrium has every
  /// bus voltage exactly 1.0.
  void calibrate_noload_voltage();
  void validate() const;  // throws ConfigError
};

struct EnvState {
  double t = 0.0;
  std::vector<double> voltages;   // per bus
  std::vector<double> remaining;  // p_j per load bus, in [0, 1]
  std::vector<double> recovery;   // x_j per load bus
  bool fault_active = false;
  std::optional<double> t_clear;  // T_pf, set once the fault clears
};

struct StepInfo {
  std::vector<double> shed;  // actual p.u. shed this step per load bus
  int invalid_count = 0;
  // Observed-bus voltages followed by remaining load fractions.
  std::vector<double> observation;
};

/// Calibrated equilibrium state at t = 0.
EnvState init_scenario(const GridConfig& cfg, const FaultTask& task);

/// Advances one control interval. Shedding is applied once at the start
/// of the interval, as a fraction of the INITIAL bus load. Throws
/// SimulationDiverged on non-finite state.
StepInfo step(EnvState& state, std::span<const double> action,
              const GridConfig& cfg, const FaultTask& task);

std::vector<double> observation(const EnvState& state, const GridConfig& cfg);

/// Rule-based under-voltage load shedding baseline: shed a 20% stage at
/// a bus whose local voltage stayed below the threshold continuously
/// for the delay, at most max_stages stages per bus.
struct UvlsConfig {
  double threshold = 0.90;
  double delay = 0.33;   // seconds
  double stage = -0.2;
  int max_stages = 3;
};

class UvlsController {
 public:
  explicit UvlsController(const GridConfig& cfg, UvlsConfig uvls = {});

  /// Evaluates the relay rule against the current state and advances
  /// the per-bus timers by one control interval.
  std::vector<double> action(const EnvState& state);

 private:
  const GridConfig& cfg_;
  UvlsConfig uvls_;
  std::vector<double> below_time_;
  std::vector<int> stages_;
};

}  // namespace gridars
