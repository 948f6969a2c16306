#include "gridars/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridars/ieee39.hpp"

namespace gridars {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_csv(s)) out.push_back(std::stod(item));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split_csv(s)) out.push_back(std::stoi(item));
  return out;
}

FaultTask parse_task(const std::string& value) {
  const auto parts = split_csv(value);
  if (parts.size() != 3)
    throw ConfigError("task must be '<bus>, <start>, <duration>': " + value);
  FaultTask task;
  task.fault_bus = std::stoi(parts[0]) - 1;  // file is 1-based
  task.fault_start = std::stod(parts[1]);
  task.fault_duration = std::stod(parts[2]);
  return task;
}

}  // namespace

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

IniFile IniFile::parse_text(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header at line " +
                          std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      ini.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value' at line " +
                        std::to_string(lineno));
    ini.sections[section].emplace_back(trim(line.substr(0, eq)),
                                       trim(line.substr(eq + 1)));
  }
  return ini;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  const auto it = sections.find(section);
  if (it == sections.end()) return false;
  for (const auto& [k, v] : it->second) {
    if (k == key) return true;
  }
  return false;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
  const auto it = sections.find(section);
  if (it == sections.end()) return fallback;
  std::string result = fallback;
  for (const auto& [k, v] : it->second) {
    if (k == key) result = v;  // last one wins
  }
  return result;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
  const auto v = get(section, key, "");
  return v.empty() ? fallback : std::stod(v);
}

int IniFile::get_int(const std::string& section, const std::string& key,
                     int fallback) const {
  const auto v = get(section, key, "");
  return v.empty() ? fallback : std::stoi(v);
}

std::vector<std::string> IniFile::get_all(const std::string& section,
                                          const std::string& key) const {
  std::vector<std::string> out;
  const auto it = sections.find(section);
  if (it == sections.end()) return out;
  for (const auto& [k, v] : it->second) {
    if (k == key) out.push_back(v);
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_run_config(const std::string& text) {
  const IniFile ini = IniFile::parse_text(text);
  RunConfig run;
  run.config_hash = fnv1a_hex(text);

  const std::string topology = ini.get("grid", "topology", "ieee39");
  if (topology != "ieee39")
    throw ConfigError("unknown topology: " + topology);

  SurrogateParams params;
  params.s0 = ini.get_double("grid", "s0", params.s0);
  params.d0 = ini.get_double("grid", "d0", params.d0);
  params.phi_min = ini.get_double("grid", "phi_min", params.phi_min);
  params.phi_d0 = ini.get_double("grid", "phi_d0", params.phi_d0);
  if (ini.has("grid", "load_buses"))
    params.load_buses = parse_ints(ini.get("grid", "load_buses", ""));
  if (ini.has("grid", "p0"))
    params.initial_load = parse_doubles(ini.get("grid", "p0", ""));
  if (ini.has("grid", "observed_buses"))
    params.observed_buses = parse_ints(ini.get("grid", "observed_buses", ""));
  params.load.alpha_s = ini.get_double("grid", "alpha_s", params.load.alpha_s);
  params.load.alpha_t = ini.get_double("grid", "alpha_t", params.load.alpha_t);
  params.load.t_p = ini.get_double("grid", "t_p", params.load.t_p);
  params.sim_dt = ini.get_double("grid", "sim_dt", params.sim_dt);
  params.control_dt = ini.get_double("grid", "control_dt", params.control_dt);
  params.episode_length =
      ini.get_double("grid", "episode_length", params.episode_length);
  if (params.load_buses.size() != params.initial_load.size())
    throw ConfigError("load_buses and p0 must have the same length");
  run.grid = make_ieee39_surrogate(params);
  run.grid.validate();

  RewardConfig& rw = run.reward;
  rw.c1 = ini.get_double("reward", "c1", rw.c1);
  rw.c2 = ini.get_double("reward", "c2", rw.c2);
  rw.c3 = ini.get_double("reward", "c3", rw.c3);
  rw.c4 = ini.get_double("reward", "c4", rw.c4);
  rw.barrier_clamp = ini.get_double("reward", "barrier_clamp", rw.barrier_clamp);
  rw.fail_after = ini.get_double("reward", "fail_after", rw.fail_after);
  rw.fail_level = ini.get_double("reward", "fail_level", rw.fail_level);
  rw.fail_penalty = ini.get_double("reward", "fail_penalty", rw.fail_penalty);

  ArsConfig& ars = run.ars;
  ars.alpha = ini.get_double("ars", "alpha", ars.alpha);
  ars.n_dirs = ini.get_int("ars", "n_dirs", ars.n_dirs);
  ars.nu = ini.get_double("ars", "nu", ars.nu);
  ars.top_b = ini.get_int("ars", "top_b", ars.top_b);
  ars.rollouts_per_dir = ini.get_int("ars", "rollouts_per_dir",
                                     ars.rollouts_per_dir);
  ars.decay = ini.get_double("ars", "decay", ars.decay);
  ars.iterations = ini.get_int("ars", "iterations", ars.iterations);
  const std::string mode = ini.get("ars", "mode", "barrier");
  if (mode == "barrier") {
    ars.mode = Mode::barrier;
  } else if (mode == "constrained") {
    ars.mode = Mode::constrained;
  } else {
    throw ConfigError("mode must be 'constrained' or 'barrier': " + mode);
  }
  ars.lambda0 = ini.get_double("ars", "lambda0", ars.lambda0);
  ars.lambda_min = ini.get_double("ars", "lambda_min", ars.lambda_min);
  ars.lambda_max = ini.get_double("ars", "lambda_max", ars.lambda_max);
  ars.seed = static_cast<std::uint64_t>(ini.get_int("ars", "seed", 0));
  ars.executors = ini.get_int("ars", "executors", ars.executors);
  ars.arch = arch_from_name(ini.get("ars", "arch", "linear"));
  ars.hidden = ini.get_int("ars", "hidden", ars.hidden);
  ars.theta_init_std =
      ini.get_double("ars", "theta_init_std", ars.theta_init_std);
  ars.action_bias_init =
      ini.get_double("ars", "action_bias_init", ars.action_bias_init);
  rw.lambda = ars.lambda0;

  for (const auto& t : ini.get_all("tasks", "task"))
    run.train_tasks.push_back(parse_task(t));
  for (const auto& t : ini.get_all("eval_tasks", "task"))
    run.eval_tasks.push_back(parse_task(t));
  if (run.train_tasks.empty()) throw ConfigError("no training tasks defined");

  try {
    run.ars.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad [ars] section: ") + e.what());
  }
  return run;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

}  // namespace gridars
