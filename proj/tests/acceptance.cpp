// End-to-end acceptance checks for the load-shedding trainer. Each
// criterion prints one [PASS]/[FAIL] line; the process exits non-zero
// if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gridars/ars.hpp"
#include "gridars/bundle.hpp"
#include "gridars/config.hpp"
#include "gridars/policy.hpp"
#include "gridars/rollout.hpp"
#include "gridars/safety.hpp"

using namespace gridars;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", index, name,
              detail.empty() ? "" : " — ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

// ---------------------------------------------------------------------
// Criterion 1: independent straight-line transcriptions of the scalar
// formulas, written top-to-bottom without reusing the library helpers.
// ---------------------------------------------------------------------

double oracle_envelope(double tau) {
  if (tau < 0.33) return 0.7;
  if (tau < 0.5) return 0.8;
  if (tau < 1.5) return 0.9;
  return 0.95;
}

// Step reward, Eq. (2) shape: failure branch, then envelope deficits
// minus shed and invalid-action penalties.
double oracle_step_reward(const std::vector<double>& v, double shed, int ivld,
                          double t, double t_clear, const RewardConfig& cfg,
                          bool* terminal) {
  *terminal = false;
  if (t > t_clear + 4.0) {
    bool low = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0.95) low = true;
    }
    if (low) {
      *terminal = true;
      return -1000.0;
    }
  }
  double dv_sum = 0.0;
  if (t > t_clear) {
    const double bound = oracle_envelope(t - t_clear);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double dv = v[i] - bound;
      dv_sum += dv < 0.0 ? dv : 0.0;
    }
  }
  return cfg.c1 * dv_sum - cfg.c2 * shed - cfg.c3 * ivld;
}

// Band form of the safety constraint, Eq. (3).
double oracle_safety(const std::vector<double>& v, double tau) {
  double center, half;
  if (tau < 0.33) {
    center = 1.1;
    half = 0.4;
  } else if (tau < 0.5) {
    center = 1.15;
    half = 0.35;
  } else if (tau < 1.5) {
    center = 1.2;
    half = 0.3;
  } else {
    center = 1.225;
    half = 0.275;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = (v[i] - center) * (v[i] - center);
    if (d > worst) worst = d;
  }
  return half * half - worst;
}

// Inverse-square barrier, Eq. (7), with the documented clamp.
double oracle_barrier(const std::vector<double>& v, double tau, double clamp) {
  const double bound = oracle_envelope(tau);
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double gap = v[i] - bound;
    if (gap <= 0.0) return clamp;
    total += 1.0 / (gap * gap);
  }
  return total < clamp ? total : clamp;
}

void criterion_1() {
  const double t_start = now_seconds();
  const RewardConfig cfg;
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> uv(0.3, 1.8);
  std::uniform_real_distribution<double> utau(1e-6, 6.0);
  std::uniform_real_distribution<double> ushed(0.0, 2.0);
  std::uniform_int_distribution<int> uivld(0, 4);
  std::uniform_int_distribution<int> usize(1, 4);
  std::uniform_real_distribution<double> uscalar(-10.0, 10.0);

  double max_err = 0.0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<double> v(usize(rng));
    for (auto& x : v) x = uv(rng);
    const double tau = utau(rng);
    const double t_clear = 1.0;
    const double t = t_clear + tau;
    const double shed = ushed(rng);
    const int ivld = uivld(rng);

    bool want_term = false;
    const double want_r =
        oracle_step_reward(v, shed, ivld, t, t_clear, cfg, &want_term);
    const StepReward got = step_reward(v, shed, ivld, t, t_clear, cfg);
    max_err = std::max(max_err, std::fabs(got.value - want_r));
    if (got.terminal != want_term) max_err = 1.0;

    max_err = std::max(
        max_err, std::fabs(safety_fn(v, t, t_clear, cfg) - oracle_safety(v, tau)));
    max_err = std::max(
        max_err, std::fabs(barrier_fn(v, t, t_clear, cfg) -
                           oracle_barrier(v, tau, cfg.barrier_clamp)));

    const double r = uscalar(rng), f = uscalar(rng), lam = ushed(rng);
    max_err = std::max(max_err,
                       std::fabs(lagrangian_reward(r, f, lam) - (r + lam * f)));
    const double B = ushed(rng) * 100.0;
    max_err = std::max(
        max_err, std::fabs(barrier_reward(r, B, cfg.c4) - (r - cfg.c4 * B)));
  }
  const double elapsed = now_seconds() - t_start;
  char detail[128];
  std::snprintf(detail, sizeof(detail), "max abs error %.3g, %.2f s", max_err,
                elapsed);
  report(1, "formula oracle suite", max_err < 1e-12 && elapsed < 5.0, detail);
}

// ---------------------------------------------------------------------
// Criterion 2: ARS finds the optimum of a 1-action quadratic.
// ---------------------------------------------------------------------

void criterion_2() {
  const double t_start = now_seconds();
  const double target = -0.12;
  bool all_ok = true;
  std::string detail;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    ArsConfig cfg;
    cfg.mode = Mode::barrier;
    cfg.n_dirs = 8;
    cfg.top_b = 4;
    cfg.rollouts_per_dir = 1;
    cfg.iterations = 300;
    cfg.alpha = 0.05;
    cfg.nu = 0.1;
    cfg.decay = 1.0;
    cfg.seed = seed;
    cfg.action_bias_init = 0.0;

    EpisodeRunner runner = [target](const PolicyParams& p,
                                    const RunningStats& stats, int /*task*/,
                                    double /*lambda*/,
                                    bool collect) -> EpisodeOutcome {
      const std::vector<double> obs{1.0};
      const double a = act(p, normalize(obs, stats))[0];
      EpisodeOutcome out;
      out.plain_return = -(a - target) * (a - target);
      out.combined_return = out.plain_return;  // c4 = 0: no barrier term
      out.stats_delta = RunningStats(1);
      if (collect) out.stats_delta.update(obs);
      return out;
    };

    const TrainResult result = train(cfg, 1, 1, runner, 1);
    const std::vector<double> obs{1.0};
    const double a = act(result.params, normalize(obs, result.stats))[0];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "seed %llu: a=%.4f ",
                  static_cast<unsigned long long>(seed), a);
    detail += buf;
    if (std::fabs(a - target) >= 0.02) all_ok = false;
  }
  const double elapsed = now_seconds() - t_start;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "(%.2f s)", elapsed);
  report(2, "search reaches the quadratic optimum", all_ok && elapsed < 10.0,
         detail + buf);
}

// ---------------------------------------------------------------------
// Criterion 3: severity calibration of the bundled scenario.
// ---------------------------------------------------------------------

PolicyParams zero_shed_policy(int n_obs, int n_act) {
  // Bias far on the "no shed" side of the squash: a = -0.1(tanh+1) ~ 0.
  PolicyParams p = PolicyParams::zeros(Arch::linear, n_obs, n_act);
  for (int i = 0; i < n_act; ++i) p.theta[p.theta.size() - 1 - i] = -40.0;
  return p;
}

void criterion_3(const RunConfig& run) {
  const double t_start = now_seconds();
  const PolicyParams p = zero_shed_policy(run.grid.n_obs(), run.grid.n_load());
  const RunningStats stats(run.grid.n_obs());

  bool severe_violates = false;
  bool no_fault_clean = true;
  for (const FaultTask& task : run.train_tasks) {
    const RolloutResult res = run_episode(run.grid, task, p, stats, run.reward,
                                          Mode::barrier, 0.0);
    if (task.fault_duration == 0.28 && res.violated) severe_violates = true;
    if (task.fault_duration == 0.0 && res.violated) no_fault_clean = false;
  }
  const double elapsed = now_seconds() - t_start;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "0.28 s violates: %s, 0.0 s clean: %s (%.2f s)",
                severe_violates ? "yes" : "no", no_fault_clean ? "yes" : "no",
                elapsed);
  report(3, "severity calibration", severe_violates && no_fault_clean &&
                                        elapsed < 1.0,
         detail);
}

// ---------------------------------------------------------------------
// Criterion 4 (with 5 and 8 piggybacking on its histories): full safe
// training in both modes against the bundled nine-task set.
// ---------------------------------------------------------------------

struct ModeRun {
  TrainResult result;
  double seconds = 0.0;
  Mode mode;
};

ModeRun train_mode(const RunConfig& run, Mode mode) {
  ArsConfig cfg = run.ars;
  cfg.mode = mode;
  EpisodeRunner runner =
      make_grid_runner(run.grid, run.reward, mode, run.train_tasks);
  const double t0 = now_seconds();
  ModeRun out{train(cfg, run.grid.n_obs(), run.grid.n_load(), runner,
                    static_cast<int>(run.train_tasks.size())),
              0.0, mode};
  out.seconds = now_seconds() - t0;
  return out;
}

void criterion_4(const RunConfig& run, const ModeRun& constrained,
                 const ModeRun& barrier) {
  // UVLS reference: total shed on every task that violates without
  // control.
  const PolicyParams zero_shed =
      zero_shed_policy(run.grid.n_obs(), run.grid.n_load());
  const RunningStats fresh(run.grid.n_obs());

  std::vector<FaultTask> all_tasks = run.train_tasks;
  all_tasks.insert(all_tasks.end(), run.eval_tasks.begin(),
                   run.eval_tasks.end());

  bool ok = true;
  std::string detail;
  for (const ModeRun* mr : {&constrained, &barrier}) {
    const char* name = mr->mode == Mode::constrained ? "constrained" : "barrier";
    int violations = 0;
    for (const FaultTask& task : all_tasks) {
      const RolloutResult res =
          run_episode(run.grid, task, mr->result.params, mr->result.stats,
                      run.reward, mr->mode, mr->result.lambda_final);
      if (res.violated) ++violations;
    }
    bool beats_uvls = true;
    for (const FaultTask& task : run.train_tasks) {
      const RolloutResult bare = run_episode(run.grid, task, zero_shed, fresh,
                                             run.reward, Mode::barrier, 0.0);
      if (!bare.violated) continue;  // UVLS comparison only where needed
      const RolloutResult uvls =
          run_episode_uvls(run.grid, task, run.reward, UvlsConfig{}, false);
      const RolloutResult rl =
          run_episode(run.grid, task, mr->result.params, mr->result.stats,
                      run.reward, mr->mode, mr->result.lambda_final);
      if (!(rl.total_shed < uvls.total_shed)) beats_uvls = false;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%s: %d violations, beats UVLS shed: %s, %.0f s; ", name,
                  violations, beats_uvls ? "yes" : "no", mr->seconds);
    detail += buf;
    if (violations != 0 || !beats_uvls || mr->seconds > 900.0) ok = false;
  }
  report(4, "safe training in both modes", ok, detail);
}

void criterion_5(const ModeRun& constrained, const ArsConfig& ars) {
  bool ok = true;
  double lambda = ars.lambda0;
  for (const IterationRecord& rec : constrained.result.history) {
    if (rec.lambda_before != lambda) ok = false;
    lambda = std::clamp(rec.any_violation ? 2.0 * lambda : 0.5 * lambda,
                        ars.lambda_min, ars.lambda_max);
    if (rec.lambda_after != lambda) ok = false;
  }
  if (constrained.result.lambda_final != lambda) ok = false;
  report(5, "safety multiplier double/halve replay", ok,
         ok ? "exact over " +
                  std::to_string(constrained.result.history.size()) +
                  " iterations"
            : "replay mismatch");
}

void criterion_8(const RunConfig& run, const ModeRun& constrained,
                 const ModeRun& barrier) {
  bool ok = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const ModeRun* mr : {&constrained, &barrier}) {
    for (const IterationRecord& rec : mr->result.history) {
      if (!rec.rewards_finite) ok = false;
      worst_margin = std::min(worst_margin, rec.min_reward_margin);
    }
  }
  if (!(worst_margin >= 0.0)) ok = false;
  char detail[96];
  std::snprintf(detail, sizeof(detail),
                "worst combined-reward margin over r - c4*Bmax: %.6g",
                worst_margin);
  (void)run;
  report(8, "barrier boundedness across all training rollouts", ok, detail);
}

// ---------------------------------------------------------------------
// Criterion 6: executor count never changes the bits.
// ---------------------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_6(const RunConfig& run) {
  const double t_start = now_seconds();
  std::vector<std::string> bundles, histories;
  for (int executors : {1, 4, 8}) {
    ArsConfig cfg = run.ars;
    cfg.mode = Mode::constrained;
    cfg.iterations = 8;
    cfg.executors = executors;
    EpisodeRunner runner = make_grid_runner(run.grid, run.reward,
                                            Mode::constrained, run.train_tasks);
    const TrainResult result =
        train(cfg, run.grid.n_obs(), run.grid.n_load(), runner,
              static_cast<int>(run.train_tasks.size()));

    PolicyBundle bundle;
    bundle.params = result.params;
    bundle.stats = result.stats;
    bundle.config_hash = run.config_hash;
    const std::string tag = "acceptance_exec" + std::to_string(executors);
    save_bundle(tag + ".bundle.tmp", bundle);
    write_history_csv(tag + ".history.tmp", result.history, cfg.lambda0);
    bundles.push_back(slurp(tag + ".bundle.tmp"));
    histories.push_back(slurp(tag + ".history.tmp"));
    std::remove((tag + ".bundle.tmp").c_str());
    std::remove((tag + ".history.tmp").c_str());
  }
  const bool ok = !bundles[0].empty() && bundles[0] == bundles[1] &&
                  bundles[1] == bundles[2] && histories[0] == histories[1] &&
                  histories[1] == histories[2];
  char detail[64];
  std::snprintf(detail, sizeof(detail), "executors 1/4/8, %.1f s",
                now_seconds() - t_start);
  report(6, "bitwise-deterministic parallel training", ok, detail);
}

// ---------------------------------------------------------------------
// Criterion 7: the weight update only sees return differences.
// ---------------------------------------------------------------------

void criterion_7() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> ret(-1000, 1000);
  std::uniform_int_distribution<int> shift_dist(-512, 512);
  std::normal_distribution<double> normal(0.0, 1.0);
  bool ok = true;
  for (int trial = 0; trial < 500; ++trial) {
    const int n_dirs = 8, b = 4, n_theta = 10;
    std::vector<std::pair<double, double>> scores(n_dirs);
    for (auto& s : scores)
      s = {static_cast<double>(ret(rng)), static_cast<double>(ret(rng))};
    std::vector<std::vector<double>> deltas(n_dirs,
                                            std::vector<double>(n_theta));
    for (auto& d : deltas)
      for (auto& x : d) x = normal(rng);
    std::vector<double> theta(n_theta);
    for (auto& x : theta) x = normal(rng);

    const double shift = static_cast<double>(shift_dist(rng));
    auto shifted = scores;
    for (auto& s : shifted) {
      s.first += shift;
      s.second += shift;
    }

    const Selection sa = select_top(scores, b);
    const Selection sb = select_top(shifted, b);
    const auto ua =
        update_weights(theta, scores, deltas, sa.indices, 0.02, sa.sigma_b);
    const auto ub =
        update_weights(theta, shifted, deltas, sb.indices, 0.02, sb.sigma_b);
    if (sa.indices != sb.indices || ua != ub) ok = false;
  }
  report(7, "update invariance under constant return shifts", ok,
         ok ? "exact over 500 random iterations" : "bitwise mismatch");
}

}  // namespace

int main() {
  const RunConfig run = load_run_config(GRIDARS_CONFIG_FILE);

  criterion_1();
  criterion_2();
  criterion_3(run);

  std::printf("training constrained mode (%d iterations)...\n",
              run.ars.iterations);
  std::fflush(stdout);
  const ModeRun constrained = train_mode(run, Mode::constrained);
  std::printf("training barrier mode (%d iterations)...\n",
              run.ars.iterations);
  std::fflush(stdout);
  const ModeRun barrier = train_mode(run, Mode::barrier);

  criterion_4(run, constrained, barrier);
  criterion_5(constrained, run.ars);
  criterion_6(run);
  criterion_7();
  criterion_8(run, constrained, barrier);

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criteria failed\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
