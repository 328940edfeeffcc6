#include "ensctl/experiments.hpp"

#include "ensctl/bounds.hpp"
#include "ensctl/control.hpp"
#include "ensctl/matrix_io.hpp"
#include "ensctl/parallel.hpp"
#include "ensctl/plot.hpp"
#include "ensctl/sampling.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <tuple>

namespace ensctl {

void sort_records(std::vector<ExperimentRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const ExperimentRecord& x, const ExperimentRecord& y) {
    return std::tie(x.method, x.samples, x.trial, x.metric) < std::tie(y.method, y.samples, y.trial, y.metric);
  });
}

std::string records_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = "method,N,trial,metric,value\n";
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out += to_string(r.method) + ',' + std::to_string(r.samples) + ',' + std::to_string(r.trial) + ',' +
           r.metric + ',' + buf + '\n';
  }
  return out;
}

DltiSystem random_system(Index n, Index m, std::uint64_t seed) {
  RngStream rng(seed, hash_tag("system"));
  Matrix a(n, n);
  Matrix b(n, m);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = rng.uniform(-1.0, 1.0);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) b(i, j) = rng.uniform(-1.0, 1.0);
  for (Index j = 0; j < n; ++j) a.col(j) /= a.col(j).cwiseAbs().sum();
  return DltiSystem(std::move(a), std::move(b));
}

Vector random_state(Index n, std::uint64_t seed, std::uint64_t tag) {
  RngStream rng(seed, tag);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
  return x;
}

DltiSystem random_simplex_system(Index n, Index m, std::uint64_t seed) {
  RngStream rng(seed, hash_tag("simplex-system"));
  Matrix a(n, n);
  Matrix b(n, m);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = rng.uniform();
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) b(i, j) = rng.uniform(-1.0, 1.0);
  for (Index j = 0; j < n; ++j) a.col(j) /= a.col(j).sum();
  return DltiSystem(std::move(a), project_ones_complement(b));
}

ProblemData load_problem(const ExperimentConfig& cfg) {
  ProblemData p;
  if (cfg.kind == "reach") {
    p.system = cfg.a_path.empty() ? random_simplex_system(cfg.n, cfg.m, cfg.seed)
                                  : DltiSystem(load_matrix(cfg.a_path), load_matrix(cfg.b_path));
    return p;
  }
  p.system = cfg.a_path.empty() ? random_system(cfg.n, cfg.m, cfg.seed)
                                : DltiSystem(load_matrix(cfg.a_path), load_matrix(cfg.b_path));
  const Index n = p.system.n();
  p.x0 = cfg.x0_path.empty() ? random_state(n, cfg.seed, hash_tag("x0")) : load_vector(cfg.x0_path);
  p.xf = cfg.xf_path.empty() ? Vector(Vector::Zero(n)) : load_vector(cfg.xf_path);
  if (p.x0.size() != n || p.xf.size() != n) throw ShapeMismatch("state files do not match A");
  if (cfg.kind == "track") {
    if (!cfg.trajectory_paths.empty()) {
      for (const auto& path : cfg.trajectory_paths) p.trajectory.push_back(load_vector(path));
      for (const Vector& x : p.trajectory) {
        if (x.size() != n) throw ShapeMismatch("trajectory state does not match A");
      }
    } else {
      for (int t = 0; t <= cfg.steps; ++t) {
        p.trajectory.push_back(random_state(n, cfg.seed, hash_words({hash_tag("trajectory"), std::uint64_t(t)})));
      }
    }
  }
  return p;
}

std::uint64_t trial_seed(std::uint64_t master, const std::string& kind, std::size_t samples, int trial) {
  return hash_words({master, hash_tag(kind.c_str()), samples, static_cast<std::uint64_t>(trial)});
}

namespace {

double relative_error(const Matrix& estimate, const Matrix& truth) {
  const double denom = truth.norm();
  const double diff = (estimate - truth).norm();
  return denom > 0.0 ? diff / denom : diff;
}

AlseOptions alse_options(const ExperimentConfig& cfg) {
  AlseOptions o;
  o.tol = cfg.alse_tol;
  o.max_iter = cfg.alse_max_iter;
  o.accept_unconverged = cfg.accept_unconverged;
  return o;
}

struct Cell {
  Method method;
  std::size_t samples;
  int trial;
};

std::vector<Cell> cells(const ExperimentConfig& cfg) {
  std::vector<Cell> out;
  for (Method m : cfg.methods)
    for (std::size_t n : cfg.samples)
      for (int t = 0; t < cfg.trials; ++t) out.push_back({m, n, t});
  return out;
}

// Runs body(cell) for every (method, N, trial) cell in parallel and
// flattens the per-cell records in a fixed order.
template <typename Body>
std::vector<ExperimentRecord> run_cells(const ExperimentConfig& cfg, Body&& body) {
  const std::vector<Cell> all = cells(cfg);
  std::vector<std::vector<ExperimentRecord>> slots(all.size());
  parallel_for(all.size(), cfg.threads, [&](std::size_t i) { slots[i] = body(all[i]); });
  std::vector<ExperimentRecord> out;
  for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
  sort_records(out);
  return out;
}

}  // namespace

std::vector<ExperimentRecord> run_estimation_experiment(const ExperimentConfig& cfg, const ProblemData& p) {
  const Matrix x0 = p.x0;
  const Matrix& a = p.system.a;
  const AlseOptions opts = alse_options(cfg);
  return run_cells(cfg, [&](const Cell& c) {
    const std::uint64_t seed = trial_seed(cfg.seed, cfg.kind, c.samples, c.trial);
    auto x0_samples = draw_matrix_ensemble(x0, c.samples, RngStream(seed, hash_tag("x0")));
    auto a_samples = draw_matrix_ensemble(a, c.samples, RngStream(seed, hash_tag("A")));
    const EnsembleEstimate ex = estimate(c.method, x0, std::move(x0_samples), opts);
    const EnsembleEstimate ea = estimate(c.method, a, std::move(a_samples), opts);
    return std::vector<ExperimentRecord>{
        {c.method, c.samples, c.trial, "x0_rel_error", relative_error(ex.estimate, x0)},
        {c.method, c.samples, c.trial, "a_rel_error", relative_error(ea.estimate, a)},
    };
  });
}

std::vector<ExperimentRecord> run_control_experiment(const ExperimentConfig& cfg, const ProblemData& p) {
  const DltiSystem& sys = p.system;
  const ControlSolver solver(sys.b);
  const Vector u_actual = solver.solve(sys.a, p.x0, p.xf).u;
  const Vector next_actual = sys.step(p.x0, u_actual);
  EnsembleControlOptions base;
  base.alse = alse_options(cfg);
  return run_cells(cfg, [&](const Cell& c) {
    const std::uint64_t seed = trial_seed(cfg.seed, cfg.kind, c.samples, c.trial);
    const EnsembleSamples samples = draw_control_ensemble(p.x0, p.xf, sys.a, c.samples, RngStream(seed, 0));
    EnsembleControlOptions opts = base;
    opts.streaming_seed = seed;
    const EnsembleControl ctl = ensemble_control(sys, p.x0, p.xf, samples, c.method, opts);
    return std::vector<ExperimentRecord>{
        {c.method, c.samples, c.trial, "control_rel_error", relative_error(ctl.u, u_actual)},
        {c.method, c.samples, c.trial, "state_rel_error", relative_error(sys.step(p.x0, ctl.u), next_actual)},
    };
  });
}

std::vector<ExperimentRecord> run_tracking_experiment(const ExperimentConfig& cfg, const ProblemData& p) {
  EnsembleControlOptions base;
  base.alse = alse_options(cfg);
  return run_cells(cfg, [&](const Cell& c) {
    const std::uint64_t seed = trial_seed(cfg.seed, cfg.kind, c.samples, c.trial);
    EnsembleControlOptions opts = base;
    opts.streaming_seed = seed;
    const TrajectoryResult r =
        track_trajectory(p.system, p.trajectory, c.method, c.samples, RngStream(seed, 0), opts);
    std::vector<ExperimentRecord> out;
    for (std::size_t t = 0; t < r.relative_errors.size(); ++t) {
      out.push_back({c.method, c.samples, c.trial, "x" + std::to_string(t + 1) + "_rel_error",
                     r.relative_errors[t]});
    }
    return out;
  });
}

namespace {

std::vector<double> linear_grid(double hi, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int g = 0; g < points; ++g) {
    grid[static_cast<std::size_t>(g)] = points == 1 ? hi : hi * g / (points - 1);
  }
  return grid;
}

std::string curve_csv(const std::vector<double>& t, const std::vector<double>& freq,
                      const std::vector<double>& bound) {
  std::string out = "t,empirical_frequency,bound_value\n";
  char buf[128];
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t[i], freq[i], bound[i]);
    out += buf;
  }
  return out;
}

int violations(const std::vector<double>& freq, const std::vector<double>& bound) {
  int count = 0;
  for (std::size_t i = 0; i < freq.size(); ++i) count += freq[i] > bound[i] ? 1 : 0;
  return count;
}

}  // namespace

BoundsResult run_bounds_experiment(const ExperimentConfig& cfg, const ProblemData& p) {
  if (std::find(cfg.methods.begin(), cfg.methods.end(), Method::uniform) == cfg.methods.end()) {
    throw ConfigError("the bounds experiment verifies uniform averaging; include 'uniform' in methods");
  }
  const DltiSystem& sys = p.system;
  const Index n = sys.n();
  const double c_dim = dimension_constant(n);
  const auto trials = static_cast<std::size_t>(cfg.bound_trials);
  const ControlSolver solver(sys.b);
  const Vector v = solver.solve(sys.a, p.x0, p.xf).u;
  const Vector u = v;
  const Vector x1 = sys.step(p.x0, u);
  const MatrixSampler x0_sampler{Matrix(p.x0)};
  const MatrixSampler a_sampler(sys.a);
  const MatrixSampler b_sampler(sys.b);

  BoundsResult out;
  for (std::size_t big_n : cfg.samples) {
    const std::string suffix = "_N" + std::to_string(big_n) + ".csv";
    const std::uint64_t seed = trial_seed(cfg.seed, cfg.kind, big_n, 0);

    // Per-component Hoeffding: component i of a draw lies in {0, +-gamma}.
    const double g = gamma_vec(p.x0);
    const std::vector<double> t_grid = linear_grid(g, cfg.grid_points);
    const Matrix comp = component_deviation_frequencies(p.x0, t_grid, trials, big_n,
                                                        RngStream(seed, hash_tag("hoeffding")), cfg.threads);
    std::vector<double> h_freq(t_grid.size());
    std::vector<double> h_bound(t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      h_freq[k] = comp.col(static_cast<Index>(k)).maxCoeff();
      BoundSpec spec;
      spec.range_lo = 0.0;
      spec.range_hi = g;
      spec.weights = uniform_weights(big_n);
      spec.deviation = t_grid[k];
      spec.exponent_constant = cfg.hoeffding_constant;
      h_bound[k] = weighted_hoeffding_bound(spec);
    }
    out.curves["bounds_hoeffding" + suffix] = curve_csv(t_grid, h_freq, h_bound);

    // |B (v - mean u)| for the uniform control combination.
    std::vector<double> control_dev(trials);
    std::vector<double> state_dev(trials);
    const RngStream control_rng(seed, hash_tag("control"));
    const RngStream state_rng(seed, hash_tag("state"));
    parallel_for(trials, cfg.threads, [&](std::size_t i) {
      const EnsembleSamples s = draw_control_ensemble(p.x0, p.xf, sys.a, big_n, control_rng.substream(i));
      const EnsembleControl ctl = ensemble_control(sys, p.x0, p.xf, s, Method::uniform);
      control_dev[i] = (sys.b * (v - ctl.u)).norm();

      RngStream run = state_rng.substream(i);
      Vector sum = Vector::Zero(n);
      for (std::size_t r = 0; r < big_n; ++r) {
        const Vector x = x0_sampler.draw(run).dense();
        sum += a_sampler.draw(run).apply(x) + b_sampler.draw(run).apply(u);
      }
      state_dev[i] = (sum / static_cast<double>(big_n) - x1).norm();
    });

    VarianceBoundInputs in;
    in.samples = static_cast<double>(big_n);
    in.dimension_constant = c_dim;
    in.beta = control_beta(sample_norm_bound(sys.a), p.x0);
    in.gamma_x0 = gamma_vec(p.x0);
    in.gamma_xf = gamma_vec(p.xf);
    in.gamma_a = gamma_mat(sys.a);
    in.u_norm = u.norm();
    in.gamma_b = gamma_mat(sys.b);
    in.a_norm = sys.a.operatorNorm();
    in.x0_norm = p.x0.norm();

    for (const auto& [name, dev, state] : {std::tuple{"control", &control_dev, false},
                                           std::tuple{"state", &state_dev, true}}) {
      const double hi = *std::max_element(dev->begin(), dev->end());
      const std::vector<double> grid = linear_grid(hi, cfg.grid_points);
      const auto points = deviation_frequencies(*dev, grid);
      std::vector<double> freq;
      std::vector<double> bound;
      for (const auto& pt : points) {
        freq.push_back(pt.frequency);
        in.epsilon = pt.t;
        bound.push_back(state ? state_variance_bound(in) : control_variance_bound(in));
      }
      out.curves[std::string("bounds_") + name + suffix] = curve_csv(grid, freq, bound);
      out.records.push_back({Method::uniform, big_n, 0, std::string(name) + "_violations",
                             static_cast<double>(violations(freq, bound))});
    }
    out.records.push_back({Method::uniform, big_n, 0, "hoeffding_violations",
                           static_cast<double>(violations(h_freq, h_bound))});
  }
  sort_records(out.records);
  return out;
}

ReachabilityReport run_reach_check(const ExperimentConfig& cfg, const ProblemData& p) {
  return simplex_reachability_check(p.system.a, p.system.b, cfg.reach_tol);
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string run_meta(const ExperimentConfig& cfg) {
  std::string meta = "seed = " + std::to_string(cfg.seed) + "\n";
  meta += "ensctl_version = 0.1.0\n";
  meta += "eigen_version = " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
          "." + std::to_string(EIGEN_MINOR_VERSION) + "\n";
  meta += std::string("compiler = ") + __VERSION__ + "\n";
  meta += "[config]\n" + echo_config(cfg);
  return meta;
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const ProblemData p = load_problem(cfg);
  const std::filesystem::path dir(cfg.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<ExperimentRecord> records;
  if (cfg.kind == "estimate") {
    records = run_estimation_experiment(cfg, p);
  } else if (cfg.kind == "control") {
    records = run_control_experiment(cfg, p);
  } else if (cfg.kind == "track") {
    records = run_tracking_experiment(cfg, p);
  } else if (cfg.kind == "bounds") {
    BoundsResult b = run_bounds_experiment(cfg, p);
    for (const auto& [name, text] : b.curves) write_text(dir / name, text);
    records = std::move(b.records);
  } else if (cfg.kind == "reach") {
    write_text(dir / "reach_report.txt", run_reach_check(cfg, p).to_key_value());
  }

  write_text(dir / "records.csv", records_csv(records));
  write_text(dir / "run_meta.txt", run_meta(cfg));
  if (cfg.plot && !records.empty()) emit_plot(records, (dir / "plot.svg").string());
}

}  // namespace ensctl
