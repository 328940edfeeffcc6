#include <doctest.h>

#include "ensctl/experiments.hpp"
#include "ensctl/plot.hpp"
#include "ensctl/sampling.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ensctl;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<ExperimentRecord> fixed_records() {
  std::vector<ExperimentRecord> r;
  const double values[3][3] = {{0.8, 0.25, 0.08}, {0.1, 1e-3, 0.0}, {0.4, 0.15, 0.12}};
  const Method methods[3] = {Method::uniform, Method::alse, Method::slse};
  const std::size_t ns[3] = {100, 1000, 10000};
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k)
      for (int t = 0; t < 2; ++t) {
        r.push_back({methods[m], ns[k], t, "control_rel_error", values[m][k] * (1.0 + 0.1 * t)});
        r.push_back({methods[m], ns[k], t, "state_rel_error", 0.5 * values[m][k] * (1.0 + 0.1 * t)});
      }
  return r;
}

ExperimentConfig small_config(const std::string& kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.n = 4;
  cfg.m = 3;
  cfg.samples = {20, 80};
  cfg.trials = 3;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("record csv and ordering") {
  std::vector<ExperimentRecord> r{{Method::slse, 10, 0, "x", 1.0},
                                  {Method::uniform, 100, 1, "x", 0.5},
                                  {Method::uniform, 10, 2, "x", 0.25},
                                  {Method::uniform, 10, 0, "y", 1.0 / 3.0}};
  sort_records(r);
  CHECK(records_csv(r) ==
        "method,N,trial,metric,value\n"
        "uniform,10,0,y,0.33333333333333331\n"
        "uniform,10,2,x,0.25\n"
        "uniform,100,1,x,0.5\n"
        "slse,10,0,x,1\n");
}

TEST_CASE("random systems") {
  const DltiSystem s = random_system(6, 3, 11);
  for (Index j = 0; j < 6; ++j) CHECK(s.a.col(j).cwiseAbs().sum() == doctest::Approx(1.0));
  CHECK(s.b.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(random_system(6, 3, 11).a == s.a);
  const DltiSystem simplex = random_simplex_system(3, 2, 5);
  CHECK((simplex.a.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(simplex.b.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-atom targets give zero estimation error") {
  ExperimentConfig cfg = small_config("estimate");
  ProblemData p;
  p.system = DltiSystem(Matrix::Identity(3, 3), Matrix::Identity(3, 2));
  p.x0 = Vector{{0.0, 2.0, 0.0}};
  p.xf = Vector::Zero(3);
  for (const auto& r : run_estimation_experiment(cfg, p)) CHECK(r.value < 1e-12);
  cfg.kind = "control";
  for (const auto& r : run_control_experiment(cfg, p)) CHECK(r.value < 1e-12);
}

TEST_CASE("records cover every method and sample count") {
  const ExperimentConfig cfg = small_config("control");
  const ProblemData p = load_problem(cfg);
  const auto records = run_control_experiment(cfg, p);
  CHECK(records.size() == 3 * 2 * 3 * 2);
  for (const auto& r : records) {
    CHECK(std::find(cfg.methods.begin(), cfg.methods.end(), r.method) != cfg.methods.end());
    CHECK(std::find(cfg.samples.begin(), cfg.samples.end(), r.samples) != cfg.samples.end());
    CHECK(std::isfinite(r.value));
  }
}

TEST_CASE("experiments are deterministic across thread counts") {
  for (const char* kind : {"estimate", "control", "track"}) {
    ExperimentConfig cfg = small_config(kind);
    const ProblemData p = load_problem(cfg);
    std::string first;
    for (unsigned threads : {1u, 4u, 8u}) {
      cfg.threads = threads;
      std::vector<ExperimentRecord> r;
      if (cfg.kind == "estimate") r = run_estimation_experiment(cfg, p);
      else if (cfg.kind == "control") r = run_control_experiment(cfg, p);
      else r = run_tracking_experiment(cfg, p);
      const std::string csv = records_csv(r);
      if (first.empty()) first = csv;
      CHECK(csv == first);
    }
  }
}

TEST_CASE("run_experiment writes its outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "ensctl_run_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = small_config("control");
  cfg.out = dir.string();
  cfg.plot = true;
  run_experiment(cfg);
  CHECK(slurp(dir / "records.csv").rfind("method,N,trial,metric,value\n", 0) == 0);
  CHECK(slurp(dir / "run_meta.txt").find("seed = 7") != std::string::npos);
  CHECK(slurp(dir / "plot.svg").rfind("<svg", 0) == 0);

  cfg.kind = "reach";
  run_experiment(cfg);
  CHECK(slurp(dir / "reach_report.txt").find("verdict=") != std::string::npos);

  cfg.kind = "bounds";
  cfg.bound_trials = 200;
  cfg.samples = {50};
  cfg.grid_points = 5;
  run_experiment(cfg);
  for (const char* name : {"bounds_hoeffding_N50.csv", "bounds_control_N50.csv", "bounds_state_N50.csv"}) {
    const std::string curve = slurp(dir / name);
    CHECK(curve.rfind("t,empirical_frequency,bound_value\n", 0) == 0);
  }
  CHECK(slurp(dir / "records.csv").find("hoeffding_violations,0") != std::string::npos);

  cfg.samples = {50, 50};
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("plots") {
  CHECK_THROWS_AS(render_plot({}), InvalidArgument);
  const auto records = fixed_records();
  const std::string svg = render_plot(records);
  CHECK(svg == render_plot(records));
  CHECK(svg.find("control_rel_error") != std::string::npos);
  CHECK(svg.find("state_rel_error") != std::string::npos);
  // y axis spans the decades of the data: medians 0.084 .. 1e-4 (and a zero floored to 1e-5)
  CHECK(svg.find(">1e0<") != std::string::npos);
  CHECK(svg.find(">1e-5<") != std::string::npos);
  for (const char* n : {">100<", ">1000<", ">10000<"}) CHECK(svg.find(n) != std::string::npos);

  const std::filesystem::path golden = std::filesystem::path(ENSCTL_SOURCE_DIR) / "tests/golden/plot.svg";
  if (std::getenv("ENSCTL_UPDATE_GOLDEN")) std::ofstream(golden, std::ios::binary) << svg;
  CHECK(slurp(golden) == svg);
}
