#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridars/ars.hpp"
#include "gridars/grid_env.hpp"
#include "gridars/safety.hpp"

namespace gridars {

/// Parsed line-oriented key-value file with [section] headers.
/// Repeated keys accumulate in order; '#' starts a comment.
struct IniFile {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>>
      sections;

  static IniFile parse_file(const std::string& path);   // throws ConfigError
  static IniFile parse_text(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;
  std::vector<std::string> get_all(const std::string& section,
                                   const std::string& key) const;
};

struct RunConfig {
  GridConfig grid;
  RewardConfig reward;
  ArsConfig ars;
  std::vector<FaultTask> train_tasks;
  std::vector<FaultTask> eval_tasks;  // includes held-out faults
  std::string config_hash;            // FNV-1a of the file bytes, hex
};

/// Loads a full run configuration. Bus numbers in the file are 1-based.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace gridars
