#pragma once

#include "ensctl/averaging.hpp"
#include "ensctl/config.hpp"
#include "ensctl/reachability.hpp"
#include "ensctl/types.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ensctl {

struct ExperimentRecord {
  Method method;
  std::size_t samples;
  int trial;
  std::string metric;
  double value;
};

/// Sorts by (method, N, trial, metric).
void sort_records(std::vector<ExperimentRecord>& records);

/// "method,N,trial,metric,value" followed by one row per record, values at %.17g.
std::string records_csv(const std::vector<ExperimentRecord>& records);

/// Problem data of one experiment: the true system plus states.
struct ProblemData {
  DltiSystem system;
  Vector x0;
  Vector xf;
  std::vector<Vector> trajectory;  // track only
};

/// Entries uniform on [-1, 1]; every column of A rescaled to unit absolute mass.
DltiSystem random_system(Index n, Index m, std::uint64_t seed);
Vector random_state(Index n, std::uint64_t seed, std::uint64_t tag);

/// Column-stochastic A and B with 1^T B = 0, for reachability runs.
DltiSystem random_simplex_system(Index n, Index m, std::uint64_t seed);

/// Loads files named in the config, generating from the seed whatever is absent.
ProblemData load_problem(const ExperimentConfig& cfg);

/// Seed of the samples shared by every method for one (N, trial) cell.
std::uint64_t trial_seed(std::uint64_t master, const std::string& kind, std::size_t samples, int trial);

std::vector<ExperimentRecord> run_estimation_experiment(const ExperimentConfig& cfg, const ProblemData& p);
std::vector<ExperimentRecord> run_control_experiment(const ExperimentConfig& cfg, const ProblemData& p);
std::vector<ExperimentRecord> run_tracking_experiment(const ExperimentConfig& cfg, const ProblemData& p);

struct BoundsResult {
  std::vector<ExperimentRecord> records;  // violation counts per N
  std::map<std::string, std::string> curves;  // file name -> "t,empirical_frequency,bound_value" CSV
};
BoundsResult run_bounds_experiment(const ExperimentConfig& cfg, const ProblemData& p);

ReachabilityReport run_reach_check(const ExperimentConfig& cfg, const ProblemData& p);

/// Runs the configured experiment and writes records.csv, run_meta.txt,
/// the kind-specific files and, if requested, plot.svg into cfg.out.
void run_experiment(const ExperimentConfig& cfg);

}  // namespace ensctl
