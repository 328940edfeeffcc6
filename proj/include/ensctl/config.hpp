#pragma once

#include "ensctl/averaging.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ensctl {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::string kind;  // estimate | control | track | reach | bounds

  // System files; a system is generated from the seed when a_path is empty.
  std::string a_path;
  std::string b_path;
  std::string x0_path;
  std::string xf_path;                      // empty: the origin
  std::vector<std::string> trajectory_paths;  // x(0), x(1), ..., for track
  Index n = 10;
  Index m = 5;
  int steps = 2;  // trajectory length K when generated

  std::vector<std::size_t> samples{100, 1000, 10000};
  std::vector<Method> methods{Method::uniform, Method::alse, Method::slse};
  std::uint64_t seed = 1;
  int trials = 20;
  std::string out = "out";
  bool plot = false;
  unsigned threads = 1;

  double hoeffding_constant = 2.0;
  int bound_trials = 10000;
  int grid_points = 20;

  double alse_tol = 1e-10;
  int alse_max_iter = 10000;
  bool accept_unconverged = false;
  double reach_tol = 1e-9;
};

/// Applies one `key = value` setting; unknown keys and bad values throw ConfigError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat `key = value` lines; '#' starts a comment. Relative file paths are
/// resolved against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = "",
                              ExperimentConfig cfg = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg = {});

/// Checks the schedule, counts and file references.
void validate(const ExperimentConfig& cfg);

/// Canonical `key = value` dump, stable across runs.
std::string echo_config(const ExperimentConfig& cfg);

std::vector<std::string> split_list(const std::string& text);

}  // namespace ensctl
