#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "gridars/config.hpp"
#include "gridars/grid_env.hpp"
#include "gridars/ieee39.hpp"

using namespace gridars;

namespace {

GridConfig toy_config() {
  GridConfig cfg;
  cfg.n_bus = 1;
  cfg.load_buses = {0};
  cfg.initial_load = {1.0};
  cfg.observed_buses = {0};
  cfg.sensitivity = {{0.1}};
  cfg.fault_depression = {{0.3}};
  cfg.load = LoadModel{0.0, 2.0, 0.4};
  cfg.calibrate_noload_voltage();
  return cfg;
}

// Scalar fixed-point oracle: find V solving
//   V = Vnl - S * (x + P0 * p * V^2)
// by bisection, independent of the Newton path used in the simulator.
double bisect_voltage(double vnl, double s, double x, double p0, double p) {
  double lo = 0.0, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g = vnl - s * (x + p0 * p * mid * mid) - mid;
    (g > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("single-bus equilibrium matches the bisection oracle") {
  const GridConfig cfg = toy_config();
  // Calibration puts the no-load voltage at 1 + S * P0 so the loaded
  // equilibrium sits at exactly 1.0 with x = 0.
  CHECK(cfg.noload_voltage[0] == doctest::Approx(1.1));
  const double v_oracle =
      bisect_voltage(cfg.noload_voltage[0], 0.1, 0.0, 1.0, 1.0);
  CHECK(v_oracle == doctest::Approx(1.0).epsilon(1e-10));

  const EnvState state = init_scenario(cfg, FaultTask{0, 1.0, 0.0});
  CHECK(state.voltages[0] == doctest::Approx(v_oracle).epsilon(1e-9));
  CHECK(state.remaining[0] == 1.0);
  CHECK(state.t == 0.0);
}

TEST_CASE("initial state ignores a not-yet-active fault") {
  const GridConfig cfg = toy_config();
  const EnvState a = init_scenario(cfg, FaultTask{0, 1.0, 0.0});
  const EnvState b = init_scenario(cfg, FaultTask{0, 1.0, 0.15});
  CHECK(a.voltages == b.voltages);
  CHECK(a.remaining == b.remaining);
}

TEST_CASE("equilibrium holds over a whole no-fault episode") {
  const GridConfig cfg = make_ieee39_surrogate();
  const FaultTask task{3, 1.0, 0.0};
  EnvState state = init_scenario(cfg, task);
  const std::vector<double> zero(cfg.load_buses.size(), 0.0);
  while (state.t < cfg.episode_length - 1e-9) {
    step(state, zero, cfg, task);
    for (double v : state.voltages) CHECK(std::fabs(v - 1.0) < 1e-4);
  }
}

TEST_CASE("invalid action accounting at exhausted loads") {
  const GridConfig cfg = toy_config();
  const FaultTask task{0, 1.0, 0.0};
  EnvState state = init_scenario(cfg, task);
  const std::vector<double> shed_all{-0.2};

  for (int i = 0; i < 5; ++i) {
    const StepInfo info = step(state, shed_all, cfg, task);
    CHECK(info.invalid_count == 0);
    CHECK(info.shed[0] == doctest::Approx(0.2));
  }
  // Repeated subtraction leaves a ~1e-16 sliver; one more step flushes
  // the load to exactly zero.
  CHECK(state.remaining[0] == doctest::Approx(0.0));
  step(state, shed_all, cfg, task);
  CHECK(state.remaining[0] == 0.0);

  const StepInfo info = step(state, shed_all, cfg, task);
  CHECK(info.invalid_count == 1);
  CHECK(info.shed[0] == 0.0);
}

TEST_CASE("requests above the threshold are not shedding") {
  const GridConfig cfg = toy_config();
  const FaultTask task{0, 1.0, 0.0};
  EnvState state = init_scenario(cfg, task);
  const std::vector<double> tiny{-0.005};
  const StepInfo info = step(state, tiny, cfg, task);
  CHECK(info.invalid_count == 0);
  CHECK(info.shed[0] == 0.0);
  CHECK(state.remaining[0] == 1.0);
}

TEST_CASE("shed accounting conserves initial load") {
  const GridConfig cfg = make_ieee39_surrogate();
  const FaultTask task{3, 1.0, 0.28};
  EnvState state = init_scenario(cfg, task);
  std::vector<double> total(cfg.load_buses.size(), 0.0);
  std::vector<double> action(cfg.load_buses.size(), 0.0);
  int k = 0;
  while (state.t < cfg.episode_length - 1e-9) {
    // Irregular shed pattern across buses and steps.
    for (std::size_t j = 0; j < action.size(); ++j) {
      action[j] = ((k + static_cast<int>(j)) % 7 == 0) ? -0.15 : 0.0;
    }
    const StepInfo info = step(state, action, cfg, task);
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += info.shed[j];
    ++k;
  }
  for (std::size_t j = 0; j < total.size(); ++j) {
    CHECK(total[j] == doctest::Approx(cfg.initial_load[j] *
                                      (1.0 - state.remaining[j]))
                          .epsilon(1e-12));
  }
}

TEST_CASE("shedding monotonicity: more shed, higher voltages") {
  const GridConfig cfg = make_ieee39_surrogate();
  const FaultTask task{3, 1.0, 0.28};

  EnvState none = init_scenario(cfg, task);
  EnvState shed = init_scenario(cfg, task);
  const std::vector<double> zero(cfg.load_buses.size(), 0.0);
  const std::vector<double> full(cfg.load_buses.size(), -0.2);

  while (none.t < cfg.episode_length - 1e-9) {
    step(none, zero, cfg, task);
    step(shed, full, cfg, task);
    for (int i = 0; i < cfg.n_bus; ++i) {
      CHECK(shed.voltages[i] >= none.voltages[i] - 1e-12);
    }
  }
}

TEST_CASE("clearance time is recorded at fault end") {
  const GridConfig cfg = make_ieee39_surrogate();
  const FaultTask task{3, 1.0, 0.28};
  EnvState state = init_scenario(cfg, task);
  const std::vector<double> zero(cfg.load_buses.size(), 0.0);
  CHECK_FALSE(state.t_clear.has_value());
  while (state.t < 1.2) step(state, zero, cfg, task);
  CHECK_FALSE(state.t_clear.has_value());
  while (state.t < 1.3) step(state, zero, cfg, task);
  REQUIRE(state.t_clear.has_value());
  CHECK(*state.t_clear == doctest::Approx(1.28));
}

TEST_CASE("trajectories are deterministic") {
  const GridConfig cfg = make_ieee39_surrogate();
  const FaultTask task{14, 1.0, 0.15};
  EnvState a = init_scenario(cfg, task);
  EnvState b = init_scenario(cfg, task);
  const std::vector<double> act(cfg.load_buses.size(), -0.05);
  while (a.t < cfg.episode_length - 1e-9) {
    const StepInfo ia = step(a, act, cfg, task);
    const StepInfo ib = step(b, act, cfg, task);
    CHECK(a.voltages == b.voltages);
    CHECK(ia.observation == ib.observation);
  }
}

TEST_CASE("observation layout") {
  const GridConfig cfg = make_ieee39_surrogate();
  const EnvState state = init_scenario(cfg, FaultTask{3, 1.0, 0.0});
  const auto obs = observation(state, cfg);
  REQUIRE(static_cast<int>(obs.size()) == cfg.n_obs());
  for (std::size_t i = 0; i < cfg.observed_buses.size(); ++i) {
    CHECK(obs[i] == state.voltages[cfg.observed_buses[i]]);
  }
  for (std::size_t j = 0; j < cfg.load_buses.size(); ++j) {
    CHECK(obs[cfg.observed_buses.size() + j] == state.remaining[j]);
  }
}

TEST_CASE("UVLS relay rule") {
  const GridConfig cfg = toy_config();
  UvlsController uvls(cfg);
  EnvState state = init_scenario(cfg, FaultTask{0, 1.0, 0.0});

  SUBCASE("healthy voltage never trips") {
    state.voltages[0] = 0.95;
    for (int i = 0; i < 50; ++i) {
      const auto a = uvls.action(state);
      CHECK(a[0] == 0.0);
    }
  }

  SUBCASE("sustained undervoltage trips one stage") {
    state.voltages[0] = 0.85;
    // 0.33 s at control_dt = 0.1 s: the timer crosses the delay on the
    // fourth consecutive low sample.
    CHECK(uvls.action(state)[0] == 0.0);
    CHECK(uvls.action(state)[0] == 0.0);
    CHECK(uvls.action(state)[0] == 0.0);
    CHECK(uvls.action(state)[0] == -0.2);
  }

  SUBCASE("recovery resets the timer") {
    state.voltages[0] = 0.85;
    uvls.action(state);
    uvls.action(state);
    state.voltages[0] = 0.95;
    uvls.action(state);
    state.voltages[0] = 0.85;
    CHECK(uvls.action(state)[0] == 0.0);
    CHECK(uvls.action(state)[0] == 0.0);
    CHECK(uvls.action(state)[0] == 0.0);
    CHECK(uvls.action(state)[0] == -0.2);
  }

  SUBCASE("stage cap") {
    state.voltages[0] = 0.5;
    int stages = 0;
    for (int i = 0; i < 100; ++i) {
      if (uvls.action(state)[0] < 0.0) ++stages;
    }
    CHECK(stages == 3);
  }
}

TEST_CASE("config validation failures") {
  GridConfig cfg = toy_config();
  cfg.sensitivity[0][0] = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  GridConfig cfg2 = toy_config();
  cfg2.control_dt = 0.15;
  cfg2.sim_dt = 0.004;  // 37.5 sub-steps per control interval
  CHECK_THROWS_AS(cfg2.validate(), ConfigError);

  GridConfig cfg3 = toy_config();
  cfg3.noload_voltage[0] = 1.2;  // breaks the 1.0 p.u. calibration
  CHECK_THROWS_AS(init_scenario(cfg3, FaultTask{0, 1.0, 0.0}), ConfigError);
}

TEST_CASE("severity calibration of the bundled surrogate") {
  const GridConfig cfg = make_ieee39_surrogate();
  CHECK(cfg.n_bus == 39);
  CHECK(cfg.load_buses == std::vector<int>{3, 6, 17});
  CHECK(cfg.observed_buses == std::vector<int>{3, 6, 7, 17});

  // A 0.28 s fault at bus 4 (0-based 3) without control dips bus 4 well
  // below the 0.95 p.u. long-run bound; the no-fault task stays flat.
  const std::vector<double> zero(cfg.load_buses.size(), 0.0);
  FaultTask severe{3, 1.0, 0.28};
  EnvState state = init_scenario(cfg, severe);
  double v_late = 1.0;
  while (state.t < cfg.episode_length - 1e-9) {
    step(state, zero, cfg, severe);
    if (std::fabs(state.t - 2.8) < 1e-9) v_late = state.voltages[3];
  }
  CHECK(v_late < 0.95);
}
