#include "gridars/ars.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>

#include "gridars/rollout.hpp"

namespace gridars {

void ArsConfig::validate() const {
  if (n_dirs < 0) throw std::invalid_argument("n_dirs must be >= 0");
  if (n_dirs > 0 && (top_b < 1 || top_b > n_dirs))
    throw std::invalid_argument("top_b must be in [1, n_dirs]");
  if (rollouts_per_dir < 1)
    throw std::invalid_argument("rollouts_per_dir must be >= 1");
  if (!(decay > 0.0 && decay <= 1.0))
    throw std::invalid_argument("decay must be in (0, 1]");
  if (!(alpha > 0.0) || !(nu > 0.0))
    throw std::invalid_argument("alpha and nu must be positive");
  if (!(lambda_min > 0.0) || lambda_min > lambda_max)
    throw std::invalid_argument("bad lambda bounds");
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (executors < 1) throw std::invalid_argument("executors must be >= 1");
}

std::vector<std::vector<double>> sample_directions(std::mt19937_64& rng,
                                                   int n_dirs,
                                                   std::size_t n_theta) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> deltas(n_dirs);
  for (auto& d : deltas) {
    d.resize(n_theta);
    for (auto& v : d) v = normal(rng);
  }
  return deltas;
}

std::pair<std::vector<double>, std::vector<double>> perturb(
    std::span<const double> theta, std::span<const double> delta, double nu) {
  std::vector<double> plus(theta.size()), minus(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    plus[i] = theta[i] + nu * delta[i];
    minus[i] = theta[i] - nu * delta[i];
  }
  return {std::move(plus), std::move(minus)};
}

Selection select_top(std::span<const std::pair<double, double>> scores,
                     int b) {
  Selection sel;
  sel.indices.resize(scores.size());
  std::iota(sel.indices.begin(), sel.indices.end(), 0);
  std::sort(sel.indices.begin(), sel.indices.end(), [&](int a, int c) {
    const double ka = std::max(scores[a].first, scores[a].second);
    const double kc = std::max(scores[c].first, scores[c].second);
    if (ka != kc) return ka > kc;
    return a < c;
  });
  sel.indices.resize(std::min<std::size_t>(b, scores.size()));

  double sum = 0.0;
  for (int i : sel.indices) sum += scores[i].first + scores[i].second;
  const double n = 2.0 * static_cast<double>(sel.indices.size());
  const double mean = sum / n;
  double sq = 0.0;
  for (int i : sel.indices) {
    sq += (scores[i].first - mean) * (scores[i].first - mean);
    sq += (scores[i].second - mean) * (scores[i].second - mean);
  }
  sel.sigma_b = std::sqrt(sq / n);
  return sel;
}

std::vector<double> update_weights(
    std::span<const double> theta,
    std::span<const std::pair<double, double>> scores,
    const std::vector<std::vector<double>>& deltas,
    std::span<const int> selected, double alpha, double sigma_b) {
  std::vector<double> out(theta.begin(), theta.end());
  if (selected.empty()) return out;
  const double scale =
      alpha / (static_cast<double>(selected.size()) * std::max(sigma_b, 1e-8));
  for (int i : selected) {
    const double w = scale * (scores[i].first - scores[i].second);
    const auto& d = deltas[i];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * d[k];
  }
  return out;
}

std::pair<double, double> decay(double alpha, double nu, double rate) {
  return {rate * alpha, rate * nu};
}

double update_lambda(double lambda, bool any_violation, double lambda_min,
                     double lambda_max) {
  const double next = any_violation ? 2.0 * lambda : 0.5 * lambda;
  return std::clamp(next, lambda_min, lambda_max);
}

std::uint64_t theta_checksum(std::span<const double> theta) {
  // FNV-1a over the raw bytes.
  std::uint64_t h = 1469598103934665603ull;
  for (double v : theta) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  return h;
}

TrainResult train(const ArsConfig& cfg, int n_obs, int n_act,
                  const EpisodeRunner& runner, int n_tasks, bool verbose) {
  cfg.validate();
  if (n_tasks < 1) throw std::invalid_argument("empty task set");

  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  result.params = PolicyParams::zeros(cfg.arch, n_obs, n_act, cfg.hidden);
  if (cfg.theta_init_std > 0.0) {
    std::normal_distribution<double> normal(0.0, cfg.theta_init_std);
    for (auto& v : result.params.theta) v = normal(rng);
  }
  // Output bias is the trailing n_act block in both layouts.
  for (int i = 0; i < n_act; ++i) {
    result.params.theta[result.params.theta.size() - 1 - i] +=
        cfg.action_bias_init;
  }
  result.stats = RunningStats(static_cast<std::size_t>(n_obs));
  result.lambda_final = cfg.lambda0;

  double alpha = cfg.alpha;
  double nu = cfg.nu;
  double lambda = cfg.lambda0;
  const std::size_t n_theta = result.params.theta.size();

  for (int it = 1; it <= cfg.iterations; ++it) {
    auto deltas = sample_directions(rng, cfg.n_dirs, n_theta);
    // Exhaustive task sweep when m covers the whole set, otherwise a
    // random subsample drawn on the learner thread.
    const int m = std::min(cfg.rollouts_per_dir, n_tasks);
    std::vector<int> task_indices(n_tasks);
    std::iota(task_indices.begin(), task_indices.end(), 0);
    if (m < n_tasks) {
      std::vector<int> picked;
      std::sample(task_indices.begin(), task_indices.end(),
                  std::back_inserter(picked), m, rng);
      task_indices = std::move(picked);
    }
    auto eval = evaluate_iteration(result.params, deltas, nu, result.stats,
                                   task_indices, lambda, runner,
                                   cfg.executors, /*collect_stats=*/true);
    auto sel = select_top(eval.scores, cfg.top_b);
    result.params.theta =
        update_weights(result.params.theta, eval.scores, deltas, sel.indices,
                       alpha, sel.sigma_b);

    IterationRecord rec;
    rec.iteration = it;
    rec.scores = eval.scores;
    rec.selected = sel.indices;
    rec.sigma_b = sel.sigma_b;
    rec.lambda_before = lambda;
    rec.any_violation = eval.any_violation;
    rec.violation_count = eval.violation_count;
    rec.alpha = alpha;
    rec.nu = nu;
    rec.rewards_finite = eval.rewards_finite;
    rec.min_reward_margin = eval.min_reward_margin;

    std::tie(alpha, nu) = decay(alpha, nu, cfg.decay);
    if (cfg.mode == Mode::constrained) {
      lambda = update_lambda(lambda, eval.any_violation, cfg.lambda_min,
                             cfg.lambda_max);
    }
    rec.lambda_after = lambda;
    rec.theta_checksum = theta_checksum(result.params.theta);

    double best = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& [rp, rm] : eval.scores) {
      best = std::max(best, std::max(rp, rm));
      sum += rp + rm;
    }
    rec.best_return = best;
    rec.mean_return = eval.scores.empty()
                          ? 0.0
                          : sum / (2.0 * static_cast<double>(eval.scores.size()));

    result.stats.merge(eval.merged_delta);
    result.lambda_final = lambda;
    result.history.push_back(std::move(rec));

    if (verbose) {
      std::printf("iter=%d best=%.4f mean=%.4f lambda=%.6g violations=%d\n",
                  it, best, result.history.back().mean_return, lambda,
                  eval.violation_count);
      std::fflush(stdout);
    }
  }
  return result;
}

void write_history_csv(const std::string& path,
                       std::span<const IterationRecord> history,
                       double lambda0) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open history file: " + path);
  out << "iteration,best_return,mean_return,sigma_b,alpha,nu,lambda0,"
         "lambda,any_violation,violation_count,rewards_finite,"
         "min_reward_margin,theta_checksum\n";
  char buf[512];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,"
                  "%.17g,%llu\n",
                  r.iteration, r.best_return, r.mean_return, r.sigma_b,
                  r.alpha, r.nu, lambda0, r.lambda_after,
                  r.any_violation ? 1 : 0, r.violation_count,
                  r.rewards_finite ? 1 : 0, r.min_reward_margin,
                  static_cast<unsigned long long>(r.theta_checksum));
    out << buf;
  }
}

}  // namespace gridars
