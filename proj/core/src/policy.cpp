#include "gridars/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridars {

std::string arch_name(Arch arch) {
  return arch == Arch::linear ? "linear" : "mlp_tanh";
}

Arch arch_from_name(const std::string& name) {
  if (name == "linear") return Arch::linear;
  if (name == "mlp_tanh") return Arch::mlp_tanh;
  throw std::runtime_error("unknown policy architecture: " + name);
}

std::size_t PolicyParams::param_count(Arch arch, int n_obs, int n_act,
                                      int hidden) {
  if (arch == Arch::linear) {
    return static_cast<std::size_t>(n_act) * n_obs + n_act;
  }
  return static_cast<std::size_t>(hidden) * n_obs + hidden +
         static_cast<std::size_t>(n_act) * hidden + n_act;
}

PolicyParams PolicyParams::zeros(Arch arch, int n_obs, int n_act, int hidden) {
  PolicyParams p;
  p.arch = arch;
  p.n_obs = n_obs;
  p.n_act = n_act;
  p.hidden = hidden;
  p.theta.assign(param_count(arch, n_obs, n_act, hidden), 0.0);
  return p;
}

namespace {

double squash(double y) { return -0.1 * (std::tanh(y) + 1.0); }

}  // namespace

std::vector<double> act(const PolicyParams& params,
                        std::span<const double> s_norm) {
  if (static_cast<int>(s_norm.size()) != params.n_obs)
    throw std::invalid_argument("observation dimension mismatch");
  const auto& th = params.theta;
  std::vector<double> out(params.n_act);

  if (params.arch == Arch::linear) {
    const std::size_t bias0 = static_cast<std::size_t>(params.n_act) * params.n_obs;
    for (int a = 0; a < params.n_act; ++a) {
      double y = th[bias0 + a];
      const std::size_t row = static_cast<std::size_t>(a) * params.n_obs;
      for (int i = 0; i < params.n_obs; ++i) y += th[row + i] * s_norm[i];
      if (!std::isfinite(y)) throw std::runtime_error("non-finite policy output");
      out[a] = squash(y);
    }
    return out;
  }

  const int h = params.hidden;
  const std::size_t b1_0 = static_cast<std::size_t>(h) * params.n_obs;
  const std::size_t w2_0 = b1_0 + h;
  const std::size_t b2_0 = w2_0 + static_cast<std::size_t>(params.n_act) * h;
  std::vector<double> hid(h);
  for (int k = 0; k < h; ++k) {
    double y = th[b1_0 + k];
    const std::size_t row = static_cast<std::size_t>(k) * params.n_obs;
    for (int i = 0; i < params.n_obs; ++i) y += th[row + i] * s_norm[i];
    hid[k] = std::tanh(y);
  }
  for (int a = 0; a < params.n_act; ++a) {
    double y = th[b2_0 + a];
    const std::size_t row = w2_0 + static_cast<std::size_t>(a) * h;
    for (int k = 0; k < h; ++k) y += th[row + k] * hid[k];
    if (!std::isfinite(y)) throw std::runtime_error("non-finite policy output");
    out[a] = squash(y);
  }
  return out;
}

void RunningStats::update(std::span<const double> sample) {
  if (mean.empty()) {
    mean.assign(sample.size(), 0.0);
    m2.assign(sample.size(), 0.0);
  }
  ++count;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double d = sample[i] - mean[i];
    mean[i] += d / static_cast<double>(count);
    m2[i] += d * (sample[i] - mean[i]);
  }
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  const double n = na + nb;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double d = other.mean[i] - mean[i];
    mean[i] += d * nb / n;
    m2[i] += other.m2[i] + d * d * na * nb / n;
  }
  count += other.count;
}

std::vector<double> RunningStats::std_dev() const {
  std::vector<double> out(mean.size(), 0.0);
  if (count > 1) {
    for (std::size_t i = 0; i < m2.size(); ++i) {
      out[i] = std::sqrt(m2[i] / static_cast<double>(count));
    }
  }
  return out;
}

std::vector<double> normalize(std::span<const double> s,
                              const RunningStats& stats) {
  std::vector<double> out(s.size());
  if (stats.count <= 1) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out[i] = s[i] - (stats.count == 1 ? stats.mean[i] : 0.0);
    }
    return out;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double sd =
        std::sqrt(stats.m2[i] / static_cast<double>(stats.count));
    out[i] = (s[i] - stats.mean[i]) / std::max(sd, kSigmaFloor);
  }
  return out;
}

}  // namespace gridars
