// Command-line driver: train policies, evaluate bundles against fault
// tasks, run the UVLS baseline, plot trajectories, and compare verdicts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridars/ars.hpp"
#include "gridars/bundle.hpp"
#include "gridars/config.hpp"
#include "gridars/report.hpp"
#include "gridars/rollout.hpp"

namespace fs = std::filesystem;
using namespace gridars;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitDiverged = 3;

std::string task_tag(const FaultTask& t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "bus%d_%.2fs", t.fault_bus + 1,
                t.fault_duration);
  return buf;
}

std::vector<FaultTask> all_tasks(const RunConfig& run) {
  std::vector<FaultTask> tasks = run.train_tasks;
  tasks.insert(tasks.end(), run.eval_tasks.begin(), run.eval_tasks.end());
  return tasks;
}

int cmd_train(const std::string& config_path, const std::string& mode_flag,
              int seed, int executors, const std::string& out_dir) {
  RunConfig run = load_run_config(config_path);
  if (!mode_flag.empty()) {
    run.ars.mode = mode_flag == "constrained" ? Mode::constrained : Mode::barrier;
  }
  if (seed >= 0) run.ars.seed = static_cast<std::uint64_t>(seed);
  if (executors > 0) run.ars.executors = executors;
  fs::create_directories(out_dir);

  const auto runner = make_grid_runner(run.grid, run.reward, run.ars.mode,
                                       run.train_tasks);
  const auto result =
      train(run.ars, run.grid.n_obs(), run.grid.n_load(), runner,
            static_cast<int>(run.train_tasks.size()), /*verbose=*/true);

  PolicyBundle bundle;
  bundle.params = result.params;
  bundle.stats = result.stats;
  bundle.config_hash = run.config_hash;
  for (const auto& task : run.train_tasks) {
    const auto r = run_episode(run.grid, task, bundle.params, bundle.stats,
                               run.reward, run.ars.mode, result.lambda_final);
    bundle.final_returns.push_back(r.plain_return);
  }

  const std::string mode_name =
      run.ars.mode == Mode::constrained ? "constrained" : "barrier";
  const std::string bundle_path = out_dir + "/policy_" + mode_name + ".bundle";
  const std::string history_path = out_dir + "/history_" + mode_name + ".csv";
  save_bundle(bundle_path, bundle);
  write_history_csv(history_path, result.history, run.ars.lambda0);

  std::ofstream summary(out_dir + "/summary_" + mode_name + ".txt");
  summary << "mode " << mode_name << "\nseed " << run.ars.seed
          << "\niterations " << result.history.size() << "\nlambda_final "
          << result.lambda_final << "\n";
  if (!result.history.empty()) {
    summary << "final_best_return " << result.history.back().best_return
            << "\nfinal_mean_return " << result.history.back().mean_return
            << "\nfinal_violations " << result.history.back().violation_count
            << "\n";
  }
  for (std::size_t i = 0; i < run.train_tasks.size(); ++i) {
    summary << "final_plain_return " << task_tag(run.train_tasks[i]) << ' '
            << bundle.final_returns[i] << "\n";
  }
  std::cout << "wrote " << bundle_path << " and " << history_path << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& bundle_path,
             const std::string& out_dir, bool debug_trajectories) {
  RunConfig run = load_run_config(config_path);
  const PolicyBundle bundle = load_bundle(bundle_path);
  if (bundle.params.n_obs != run.grid.n_obs() ||
      bundle.params.n_act != run.grid.n_load()) {
    throw ConfigError("bundle/config dimension mismatch");
  }
  fs::create_directories(out_dir);

  std::vector<Verdict> verdicts;
  for (const auto& task : all_tasks(run)) {
    RolloutOptions options;
    options.record_trajectory = true;
    const auto r = run_episode(run.grid, task, bundle.params, bundle.stats,
                               run.reward, run.ars.mode, run.reward.lambda,
                               options);
    Verdict v{task.fault_bus, task.fault_duration, r.violated, r.min_safety,
              r.total_shed, r.plain_return};
    verdicts.push_back(v);
    write_trajectory_csv(out_dir + "/rollout_" + task_tag(task) + ".csv", r,
                         run.grid,
                         r.fault_cleared
                             ? std::optional<double>(task.fault_start +
                                                     task.fault_duration)
                             : std::nullopt);
    (void)debug_trajectories;
  }
  write_verdicts_csv(out_dir + "/verdicts.csv", verdicts);
  for (const auto& v : verdicts) {
    std::printf("bus %d dur %.2fs violated=%s min_safety=%.4f shed=%.3f\n",
                v.fault_bus + 1, v.fault_duration, v.violated ? "yes" : "no",
                v.min_safety, v.total_shed);
  }
  return 0;
}

int cmd_baseline(const std::string& config_path, const std::string& out_dir) {
  RunConfig run = load_run_config(config_path);
  fs::create_directories(out_dir);
  std::vector<Verdict> verdicts;
  for (const auto& task : all_tasks(run)) {
    const auto r = run_episode_uvls(run.grid, task, run.reward);
    Verdict v{task.fault_bus, task.fault_duration, r.violated, r.min_safety,
              r.total_shed, r.plain_return};
    verdicts.push_back(v);
    write_trajectory_csv(out_dir + "/uvls_" + task_tag(task) + ".csv", r,
                         run.grid,
                         r.fault_cleared
                             ? std::optional<double>(task.fault_start +
                                                     task.fault_duration)
                             : std::nullopt);
  }
  write_verdicts_csv(out_dir + "/verdicts.csv", verdicts);
  for (const auto& v : verdicts) {
    std::printf("bus %d dur %.2fs violated=%s total_shed=%.3f\n",
                v.fault_bus + 1, v.fault_duration, v.violated ? "yes" : "no",
                v.total_shed);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe-ARS load shedding on a reduced-order grid surrogate"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", mode_flag, bundle_path;
  std::string input_path, output_path, rl_path, uvls_path;
  int seed = -1, executors = 0;
  bool debug_trajectories = false;

  auto* train_cmd = app.add_subcommand("train", "Train a policy bundle");
  train_cmd->add_option("--config", config_path)->required();
  train_cmd->add_option("--mode", mode_flag)
      ->check(CLI::IsMember({"constrained", "barrier"}));
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("--executors", executors);
  train_cmd->add_option("--out", out_dir);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy bundle");
  eval_cmd->add_option("--config", config_path)->required();
  eval_cmd->add_option("--bundle", bundle_path)->required();
  eval_cmd->add_option("--out", out_dir);
  eval_cmd->add_flag("--debug-trajectories", debug_trajectories);

  auto* baseline_cmd =
      app.add_subcommand("baseline", "Run the UVLS relay baseline");
  baseline_cmd->add_option("--config", config_path)->required();
  baseline_cmd->add_option("--out", out_dir);

  auto* plot_cmd = app.add_subcommand("plot", "Render a trajectory CSV as SVG");
  plot_cmd->add_option("--input", input_path)->required();
  plot_cmd->add_option("--out", output_path)->required();
  plot_cmd->add_option("--config", config_path);

  auto* compare_cmd =
      app.add_subcommand("compare", "Join RL and UVLS verdict tables");
  compare_cmd->add_option("--rl", rl_path)->required();
  compare_cmd->add_option("--uvls", uvls_path)->required();
  compare_cmd->add_option("--out", output_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed())
      return cmd_train(config_path, mode_flag, seed, executors, out_dir);
    if (eval_cmd->parsed())
      return cmd_eval(config_path, bundle_path, out_dir, debug_trajectories);
    if (baseline_cmd->parsed()) return cmd_baseline(config_path, out_dir);
    if (plot_cmd->parsed()) {
      RewardConfig reward;
      if (!config_path.empty()) reward = load_run_config(config_path).reward;
      write_svg_plot(output_path, read_trajectory_csv(input_path), reward);
      std::cout << "wrote " << output_path << "\n";
      return 0;
    }
    if (compare_cmd->parsed()) {
      const auto table = write_comparison_csv(
          output_path, read_verdicts_csv(rl_path), read_verdicts_csv(uvls_path));
      std::cout << table;
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SimulationDiverged& e) {
    std::cerr << "simulation diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
