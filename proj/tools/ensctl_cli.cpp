#include "ensctl/config.hpp"
#include "ensctl/experiments.hpp"
#include "ensctl/matrix_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble approximation and control experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> overrides;
  bool plot = false;
  auto flag = [&](const char* name, const char* key, const char* help) {
    app.add_option_function<std::string>(name, [&overrides, key](const std::string& v) { overrides[key] = v; },
                                         help);
  };
  app.add_option("--config", config_path, "flat key = value config file");
  flag("--seed", "seed", "master seed (u64)");
  flag("--out", "out", "output directory");
  flag("--methods", "methods", "comma list of uniform,alse,slse");
  flag("--samples", "samples", "comma list of sample counts N");
  flag("--trials", "trials", "trials per (method, N)");
  flag("--hoeffding-constant", "hoeffding_constant", "exponent constant of the Hoeffding bound (2 or 4)");
  flag("--threads", "threads", "worker threads");
  app.add_flag("--plot", plot, "also write plot.svg");

  for (const char* kind : {"estimate", "control", "track", "reach", "bounds"}) {
    app.add_subcommand(kind, std::string("run the ") + kind + " experiment");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    ensctl::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ensctl::load_config(config_path);
    cfg.kind = app.get_subcommands().front()->get_name();
    for (const auto& [key, value] : overrides) ensctl::apply_setting(cfg, key, value);
    if (plot) cfg.plot = true;
    ensctl::run_experiment(cfg);
    std::printf("wrote %s/records.csv\n", cfg.out.c_str());
    return kOk;
  } catch (const ensctl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const ensctl::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kConfig;
  } catch (const ensctl::RaggedRows& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kConfig;
  } catch (const ensctl::NonConvergence& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumeric;
  } catch (const ensctl::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const ensctl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  }
}
