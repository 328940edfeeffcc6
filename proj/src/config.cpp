#include "ensctl/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ensctl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + value + "'");
}

std::string resolve(const std::string& base, const std::string& path) {
  if (base.empty() || path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "," : "") << items[i];
  return out.str();
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "kind") cfg.kind = value;
  else if (key == "a") cfg.a_path = value;
  else if (key == "b") cfg.b_path = value;
  else if (key == "x0") cfg.x0_path = value;
  else if (key == "xf") cfg.xf_path = value;
  else if (key == "trajectory") cfg.trajectory_paths = split_list(value);
  else if (key == "n") cfg.n = parse_number<Index>(key, value);
  else if (key == "m") cfg.m = parse_number<Index>(key, value);
  else if (key == "steps") cfg.steps = parse_number<int>(key, value);
  else if (key == "samples") {
    cfg.samples.clear();
    for (const auto& s : split_list(value)) cfg.samples.push_back(parse_number<std::size_t>(key, s));
  } else if (key == "methods") {
    cfg.methods.clear();
    try {
      for (const auto& s : split_list(value)) cfg.methods.push_back(parse_method(s));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "trials") cfg.trials = parse_number<int>(key, value);
  else if (key == "out") cfg.out = value;
  else if (key == "plot") cfg.plot = parse_bool(key, value);
  else if (key == "threads") cfg.threads = parse_number<unsigned>(key, value);
  else if (key == "hoeffding_constant") cfg.hoeffding_constant = parse_number<double>(key, value);
  else if (key == "bound_trials") cfg.bound_trials = parse_number<int>(key, value);
  else if (key == "grid_points") cfg.grid_points = parse_number<int>(key, value);
  else if (key == "alse_tol") cfg.alse_tol = parse_number<double>(key, value);
  else if (key == "alse_max_iter") cfg.alse_max_iter = parse_number<int>(key, value);
  else if (key == "accept_unconverged") cfg.accept_unconverged = parse_bool(key, value);
  else if (key == "reach_tol") cfg.reach_tol = parse_number<double>(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir,
                              ExperimentConfig cfg) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "a" || key == "b" || key == "x0" || key == "xf" || key == "out") {
      value = resolve(base_dir, value);
    } else if (key == "trajectory") {
      std::string joined;
      for (const auto& p : split_list(value)) joined += (joined.empty() ? "" : ",") + resolve(base_dir, p);
      value = joined;
    }
    apply_setting(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::filesystem::path(path).parent_path().string(), std::move(cfg));
}

void validate(const ExperimentConfig& cfg) {
  static const char* kinds[] = {"estimate", "control", "track", "reach", "bounds"};
  if (std::find(std::begin(kinds), std::end(kinds), cfg.kind) == std::end(kinds)) {
    throw ConfigError("unknown experiment kind '" + cfg.kind + "'");
  }
  if (cfg.samples.empty()) throw ConfigError("empty sample schedule");
  if (cfg.samples.front() == 0) throw ConfigError("sample counts must be positive");
  for (std::size_t i = 1; i < cfg.samples.size(); ++i) {
    if (cfg.samples[i] <= cfg.samples[i - 1]) throw ConfigError("sample schedule must be strictly increasing");
  }
  if (cfg.methods.empty()) throw ConfigError("no methods selected");
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.n < 1 || cfg.m < 1) throw ConfigError("system dimensions must be positive");
  if (cfg.steps < 1) throw ConfigError("steps must be at least 1");
  if (cfg.bound_trials < 100) throw ConfigError("bound_trials must be at least 100");
  if (cfg.grid_points < 1) throw ConfigError("grid_points must be positive");
  if (cfg.hoeffding_constant <= 0.0) throw ConfigError("hoeffding_constant must be positive");
  if (cfg.a_path.empty() != cfg.b_path.empty()) throw ConfigError("a and b must be given together");
  std::vector<std::string> files{cfg.a_path, cfg.b_path, cfg.x0_path, cfg.xf_path};
  files.insert(files.end(), cfg.trajectory_paths.begin(), cfg.trajectory_paths.end());
  for (const auto& f : files) {
    if (!f.empty() && !std::filesystem::exists(f)) throw ConfigError("missing file " + f);
  }
}

std::string echo_config(const ExperimentConfig& cfg) {
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  std::ostringstream out;
  out.precision(17);
  out << "kind = " << cfg.kind << '\n'
      << "a = " << cfg.a_path << '\n'
      << "b = " << cfg.b_path << '\n'
      << "x0 = " << cfg.x0_path << '\n'
      << "xf = " << cfg.xf_path << '\n'
      << "trajectory = " << join(cfg.trajectory_paths) << '\n'
      << "n = " << cfg.n << '\n'
      << "m = " << cfg.m << '\n'
      << "steps = " << cfg.steps << '\n'
      << "samples = " << join(cfg.samples) << '\n'
      << "methods = " << join(methods) << '\n'
      << "seed = " << cfg.seed << '\n'
      << "trials = " << cfg.trials << '\n'
      << "plot = " << (cfg.plot ? "true" : "false") << '\n'
      << "hoeffding_constant = " << cfg.hoeffding_constant << '\n'
      << "bound_trials = " << cfg.bound_trials << '\n'
      << "grid_points = " << cfg.grid_points << '\n'
      << "alse_tol = " << cfg.alse_tol << '\n'
      << "alse_max_iter = " << cfg.alse_max_iter << '\n'
      << "accept_unconverged = " << (cfg.accept_unconverged ? "true" : "false") << '\n'
      << "reach_tol = " << cfg.reach_tol << '\n';
  return out.str();
}

}  // namespace ensctl
