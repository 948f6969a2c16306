#include "gridars/bundle.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridars {
namespace {

void write_values(std::ofstream& out, const char* key,
                  const std::vector<double>& values) {
  out << key;
  char buf[64];
  for (double v : values) {
    std::snprintf(buf, sizeof(buf), " %a", v);
    out << buf;
  }
  out << '\n';
}

std::vector<double> parse_values(std::istringstream& line) {
  std::vector<double> values;
  std::string token;
  while (line >> token) {
    values.push_back(std::strtod(token.c_str(), nullptr));
  }
  return values;
}

}  // namespace

void save_bundle(const std::string& path, const PolicyBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open bundle file: " + path);
  out << "gridars-bundle 1\n";
  out << "arch " << arch_name(bundle.params.arch) << '\n';
  out << "n_obs " << bundle.params.n_obs << '\n';
  out << "n_act " << bundle.params.n_act << '\n';
  out << "hidden " << bundle.params.hidden << '\n';
  out << "config_hash " << bundle.config_hash << '\n';
  out << "stats_count " << bundle.stats.count << '\n';
  write_values(out, "theta", bundle.params.theta);
  write_values(out, "mean", bundle.stats.mean);
  write_values(out, "m2", bundle.stats.m2);
  write_values(out, "final_returns", bundle.final_returns);
}

PolicyBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bundle file: " + path);
  PolicyBundle bundle;
  std::string line;
  bool magic_seen = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "gridars-bundle") {
      int version = 0;
      ls >> version;
      if (version != 1)
        throw std::runtime_error("unsupported bundle version in " + path);
      magic_seen = true;
    } else if (key == "arch") {
      std::string name;
      ls >> name;
      bundle.params.arch = arch_from_name(name);
    } else if (key == "n_obs") {
      ls >> bundle.params.n_obs;
    } else if (key == "n_act") {
      ls >> bundle.params.n_act;
    } else if (key == "hidden") {
      ls >> bundle.params.hidden;
    } else if (key == "config_hash") {
      ls >> bundle.config_hash;
    } else if (key == "stats_count") {
      ls >> bundle.stats.count;
    } else if (key == "theta") {
      bundle.params.theta = parse_values(ls);
    } else if (key == "mean") {
      bundle.stats.mean = parse_values(ls);
    } else if (key == "m2") {
      bundle.stats.m2 = parse_values(ls);
    } else if (key == "final_returns") {
      bundle.final_returns = parse_values(ls);
    } else {
      throw std::runtime_error("unknown bundle key: " + key);
    }
  }
  if (!magic_seen) throw std::runtime_error("not a bundle file: " + path);
  const std::size_t expected = PolicyParams::param_count(
      bundle.params.arch, bundle.params.n_obs, bundle.params.n_act,
      bundle.params.hidden);
  if (bundle.params.theta.size() != expected)
    throw std::runtime_error("bundle parameter count mismatch in " + path);
  if (bundle.stats.mean.size() != static_cast<std::size_t>(bundle.params.n_obs) ||
      bundle.stats.m2.size() != bundle.stats.mean.size())
    throw std::runtime_error("bundle statistics dimension mismatch in " + path);
  return bundle;
}

}  // namespace gridars
