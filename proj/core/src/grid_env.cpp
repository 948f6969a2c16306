#include "gridars/grid_env.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace gridars {
namespace {

double pow_exp(double v, double a) {
  if (a == 0.0) return 1.0;
  if (a == 1.0) return v;
  if (a == 2.0) return v * v;
  return std::pow(v, a);
}

const std::vector<double>* depression_row(const GridConfig& cfg,
                                          const FaultTask& task, double time) {
  const bool active = task.fault_duration > 0.0 && time >= task.fault_start &&
                      time < task.fault_start + task.fault_duration;
  if (!active) return nullptr;
  return &cfg.fault_depression[task.fault_bus];
}

// Newton solve of the load-bus voltages coupled through the linearized
// network: V_j = phi_j * (Vnl_j - sum_k S_jk * (x_k + P0_k p_k V_k^at)).
struct NetworkSolver {
  const GridConfig& cfg;
  std::array<double, kMaxLoadBuses> v_load{};  // warm-started across calls

  explicit NetworkSolver(const GridConfig& c) : cfg(c) {
    v_load.fill(1.0);
  }

  void solve(std::span<const double> x, std::span<const double> p,
             const std::vector<double>* phi) {
    const int n = cfg.n_load();
    const double at = cfg.load.alpha_t;
    std::array<double, kMaxLoadBuses> f{};
    std::array<double, kMaxLoadBuses * kMaxLoadBuses> jac{};

    for (int iter = 0; iter < 80; ++iter) {
      double resid = 0.0;
      for (int j = 0; j < n; ++j) {
        const int bus = cfg.load_buses[j];
        const double phi_j = phi ? (*phi)[bus] : 1.0;
        double net = cfg.noload_voltage[bus];
        for (int k = 0; k < n; ++k) {
          const double demand =
              x[k] + cfg.initial_load[k] * p[k] * pow_exp(v_load[k], at);
          net -= cfg.sensitivity[bus][k] * demand;
        }
        f[j] = v_load[j] - phi_j * net;
        resid = std::max(resid, std::fabs(f[j]));
        for (int k = 0; k < n; ++k) {
          const double dP = cfg.initial_load[k] * p[k] * at *
                            pow_exp(v_load[k], at - 1.0);
          jac[j * n + k] =
              (j == k ? 1.0 : 0.0) + phi_j * cfg.sensitivity[bus][k] * dP;
        }
      }
      if (!std::isfinite(resid)) throw SimulationDiverged("non-finite network residual");
      if (resid < 1e-12) return;

      // Gaussian elimination with partial pivoting on the small system.
      for (int c = 0; c < n; ++c) {
        int best = c;
        for (int r = c + 1; r < n; ++r) {
          if (std::fabs(jac[r * n + c]) > std::fabs(jac[best * n + c])) best = r;
        }
        if (best != c) {
          for (int k = 0; k < n; ++k) std::swap(jac[c * n + k], jac[best * n + k]);
          std::swap(f[c], f[best]);
        }
        const double d = jac[c * n + c];
        if (d == 0.0) throw SimulationDiverged("singular network Jacobian");
        for (int r = c + 1; r < n; ++r) {
          const double m = jac[r * n + c] / d;
          if (m == 0.0) continue;
          for (int k = c; k < n; ++k) jac[r * n + k] -= m * jac[c * n + k];
          f[r] -= m * f[c];
        }
      }
      // Back substitution (delta stored into f).
      for (int r = n - 1; r >= 0; --r) {
        double s = f[r];
        for (int k = r + 1; k < n; ++k) s -= jac[r * n + k] * f[k];
        f[r] = s / jac[r * n + r];
      }
      for (int j = 0; j < n; ++j) {
        v_load[j] = std::clamp(v_load[j] - f[j], 1e-3, 3.0);
      }
    }
    throw SimulationDiverged("network solve did not converge");
  }

  double demand(int k, std::span<const double> x,
                std::span<const double> p) const {
    return x[k] +
           cfg.initial_load[k] * p[k] * pow_exp(v_load[k], cfg.load.alpha_t);
  }

  // Voltage at an arbitrary bus given the solved load voltages.
  double bus_voltage(int bus, std::span<const double> x,
                     std::span<const double> p,
                     const std::vector<double>* phi) const {
    double net = cfg.noload_voltage[bus];
    for (int k = 0; k < cfg.n_load(); ++k) {
      net -= cfg.sensitivity[bus][k] * demand(k, x, p);
    }
    return phi ? (*phi)[bus] * net : net;
  }
};

void full_voltages(NetworkSolver& solver, const GridConfig& cfg,
                   std::span<const double> x, std::span<const double> p,
                   const std::vector<double>* phi, std::vector<double>& out) {
  out.resize(cfg.n_bus);
  for (int i = 0; i < cfg.n_bus; ++i) {
    out[i] = solver.bus_voltage(i, x, p, phi);
  }
  for (int j = 0; j < cfg.n_load(); ++j) {
    out[cfg.load_buses[j]] = solver.v_load[j];
  }
}

}  // namespace

void GridConfig::calibrate_noload_voltage() {
  noload_voltage.assign(n_bus, 1.0);
  for (int i = 0; i < n_bus; ++i) {
    for (int k = 0; k < n_load(); ++k) {
      noload_voltage[i] += sensitivity[i][k] * initial_load[k];
    }
  }
}

void GridConfig::validate() const {
  if (n_bus <= 0) throw ConfigError("n_bus must be positive");
  if (load_buses.empty()) throw ConfigError("no load buses");
  if (n_load() > kMaxLoadBuses) throw ConfigError("too many load buses");
  if (initial_load.size() != load_buses.size())
    throw ConfigError("initial_load size mismatch");
  if (static_cast<int>(sensitivity.size()) != n_bus)
    throw ConfigError("sensitivity row count mismatch");
  for (const auto& row : sensitivity) {
    if (row.size() != load_buses.size())
      throw ConfigError("sensitivity column count mismatch");
    for (double s : row) {
      if (!(s >= 0.0)) throw ConfigError("sensitivity entries must be >= 0");
    }
  }
  if (static_cast<int>(noload_voltage.size()) != n_bus)
    throw ConfigError("noload_voltage size mismatch");
  if (static_cast<int>(fault_depression.size()) != n_bus)
    throw ConfigError("fault_depression row count mismatch");
  for (const auto& row : fault_depression) {
    if (static_cast<int>(row.size()) != n_bus)
      throw ConfigError("fault_depression column count mismatch");
    for (double f : row) {
      if (!(f > 0.0 && f <= 1.0))
        throw ConfigError("fault depression factors must be in (0, 1]");
    }
  }
  for (int b : load_buses) {
    if (b < 0 || b >= n_bus) throw ConfigError("load bus index out of range");
  }
  for (int b : observed_buses) {
    if (b < 0 || b >= n_bus)
      throw ConfigError("observed bus index out of range");
  }
  if (!(sim_dt > 0.0) || !(control_dt > 0.0) || !(episode_length > 0.0))
    throw ConfigError("time steps must be positive");
  const double ratio = control_dt / sim_dt;
  if (std::fabs(ratio - std::round(ratio)) > 1e-9)
    throw ConfigError("control_dt must be an integer multiple of sim_dt");
  if (!(load.t_p > 0.0)) throw ConfigError("t_p must be positive");
}

EnvState init_scenario(const GridConfig& cfg, const FaultTask& task) {
  cfg.validate();
  if (!(task.fault_start > 0.0)) throw ConfigError("fault_start must be > 0");
  if (task.fault_duration < 0.0)
    throw ConfigError("fault_duration must be >= 0");
  if (task.fault_bus < 0 || task.fault_bus >= cfg.n_bus)
    throw ConfigError("fault bus index out of range");

  EnvState state;
  state.t = 0.0;
  state.remaining.assign(cfg.load_buses.size(), 1.0);
  // At V = 1 the recovery fixed point is x = P0 * p * (1 - 1) = 0.
  state.recovery.assign(cfg.load_buses.size(), 0.0);

  NetworkSolver solver(cfg);
  solver.solve(state.recovery, state.remaining, nullptr);
  full_voltages(solver, cfg, state.recovery, state.remaining, nullptr,
                state.voltages);
  for (double v : state.voltages) {
    if (!std::isfinite(v)) throw ConfigError("equilibrium solve failed");
    if (std::fabs(v - 1.0) > 1e-6)
      throw ConfigError("config is not calibrated to a 1.0 p.u. equilibrium");
  }
  return state;
}

StepInfo step(EnvState& state, std::span<const double> action,
              const GridConfig& cfg, const FaultTask& task) {
  const int n = cfg.n_load();
  StepInfo info;
  info.shed.assign(n, 0.0);

  // Shedding applies once at the start of the control interval.
  for (int j = 0; j < n; ++j) {
    const double a = action[j];
    if (a < kShedRequestThreshold) {
      if (state.remaining[j] <= 0.0) {
        ++info.invalid_count;
      } else {
        const double before = state.remaining[j];
        state.remaining[j] = std::max(0.0, before + a);
        info.shed[j] = cfg.initial_load[j] * (before - state.remaining[j]);
      }
    }
  }

  NetworkSolver solver(cfg);
  const int substeps =
      static_cast<int>(std::round(cfg.control_dt / cfg.sim_dt));
  const double t0 = state.t;
  const double dt = cfg.sim_dt;
  const double tp = cfg.load.t_p;

  std::array<double, kMaxLoadBuses> x{};
  for (int j = 0; j < n; ++j) x[j] = state.recovery[j];

  auto deriv = [&](const std::array<double, kMaxLoadBuses>& xs, double time,
                   std::array<double, kMaxLoadBuses>& dx) {
    solver.solve(std::span<const double>(xs.data(), n), state.remaining,
                 depression_row(cfg, task, time));
    for (int j = 0; j < n; ++j) {
      const double v = solver.v_load[j];
      const double target = cfg.initial_load[j] * state.remaining[j] *
                            (pow_exp(v, cfg.load.alpha_s) -
                             pow_exp(v, cfg.load.alpha_t));
      dx[j] = (-xs[j] + target) / tp;
    }
  };

  std::array<double, kMaxLoadBuses> k1{}, k2{}, k3{}, k4{}, tmp{};
  for (int s = 0; s < substeps; ++s) {
    const double ts = t0 + s * dt;
    deriv(x, ts, k1);
    for (int j = 0; j < n; ++j) tmp[j] = x[j] + 0.5 * dt * k1[j];
    deriv(tmp, ts + 0.5 * dt, k2);
    for (int j = 0; j < n; ++j) tmp[j] = x[j] + 0.5 * dt * k2[j];
    deriv(tmp, ts + 0.5 * dt, k3);
    for (int j = 0; j < n; ++j) tmp[j] = x[j] + dt * k3[j];
    deriv(tmp, ts + dt, k4);
    for (int j = 0; j < n; ++j) {
      x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      if (!std::isfinite(x[j]))
        throw SimulationDiverged("non-finite load recovery state");
    }
  }

  state.t = t0 + cfg.control_dt;
  for (int j = 0; j < n; ++j) state.recovery[j] = x[j];

  const double fault_end = task.fault_start + task.fault_duration;
  if (!state.t_clear && state.t >= fault_end) state.t_clear = fault_end;
  const auto* phi = depression_row(cfg, task, state.t);
  state.fault_active = phi != nullptr;

  solver.solve(state.recovery, state.remaining, phi);
  full_voltages(solver, cfg, state.recovery, state.remaining, phi,
                state.voltages);
  for (double v : state.voltages) {
    if (!std::isfinite(v)) throw SimulationDiverged("non-finite bus voltage");
  }

  info.observation = observation(state, cfg);
  return info;
}

std::vector<double> observation(const EnvState& state, const GridConfig& cfg) {
  std::vector<double> obs;
  obs.reserve(cfg.observed_buses.size() + cfg.load_buses.size());
  for (int b : cfg.observed_buses) obs.push_back(state.voltages[b]);
  for (double p : state.remaining) obs.push_back(p);
  return obs;
}

UvlsController::UvlsController(const GridConfig& cfg, UvlsConfig uvls)
    : cfg_(cfg),
      uvls_(uvls),
      below_time_(cfg.load_buses.size(), 0.0),
      stages_(cfg.load_buses.size(), 0) {}

std::vector<double> UvlsController::action(const EnvState& state) {
  std::vector<double> act(cfg_.load_buses.size(), 0.0);
  for (std::size_t j = 0; j < cfg_.load_buses.size(); ++j) {
    const double v = state.voltages[cfg_.load_buses[j]];
    if (v < uvls_.threshold) {
      below_time_[j] += cfg_.control_dt;
    } else {
      below_time_[j] = 0.0;
    }
    if (below_time_[j] >= uvls_.delay && stages_[j] < uvls_.max_stages) {
      act[j] = uvls_.stage;
      ++stages_[j];
      below_time_[j] = 0.0;
    }
  }
  return act;
}

}  // namespace gridars
