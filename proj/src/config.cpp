#include "rabi/config.hpp"

#include "rabi/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace rabi {
namespace {

struct ScenarioName {
  Scenario scenario;
  const char* name;
};

constexpr ScenarioName kScenarios[] = {
    {Scenario::Detuning, "detuning"}, {Scenario::Sensitivity, "sensitivity"},
    {Scenario::Simulate, "simulate"}, {Scenario::Fit, "fit"},
    {Scenario::Fig1, "fig1"},         {Scenario::Fig2a, "fig2a"},
    {Scenario::Fig2b, "fig2b"},       {Scenario::Scaling, "scaling"},
    {Scenario::Crossover, "crossover"},
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why + " (got '" + value + "')");
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, value, "expected a finite number");
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, value, "expected an integer");
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    items.push_back(item);
  }
  return items;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
  if (out.empty()) bad_value(key, value, "expected a non-empty comma-separated list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "expected true or false");
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += format_number(xs[i]);
    else out += std::to_string(xs[i]);
  }
  return out;
}

std::string state_name(InputState s) {
  switch (s) {
    case InputState::Css: return "css";
    case InputState::Gaussian: return "gaussian";
    case InputState::TwinFock: return "twin-fock";
  }
  return "css";
}

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError("config key '" + key + "': " + why);
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string to_string(Scenario s) {
  for (const auto& [scenario, name] : kScenarios)
    if (scenario == s) return name;
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  for (const auto& [scenario, n] : kScenarios)
    if (name == n) return scenario;
  throw ConfigError("unknown scenario '" + name + "'");
}

void ExperimentConfig::validate() const {
  require(particles >= 1, "N", "must be >= 1");
  require(ej_rate > 0.0, "ej_rate", "must be > 0");
  require(delta_rate > 0.0, "delta_rate", "must be > 0");
  require(sigma >= 0.0, "sigma", "must be >= 0");
  require(state != InputState::TwinFock || particles % 2 == 0, "N", "twin-Fock needs even N");
  require(well_separation > 0.0, "l", "must be > 0");
  require(epsilon0 > 1.0, "epsilon0", "must be > 1");
  require(alpha0 > 0.0, "alpha0", "must be > 0");
  for (double d : d_grid) require(d > 0.0, "d_grid", "distances must be > 0");
  for (double t : temperatures) require(t > 0.0, "temperatures", "must be > 0");
  require(mode_model == "point" || mode_model == "gaussian" || mode_model == "calibrated",
          "mode_model", "must be point, gaussian or calibrated");
  require(mode_width >= 0.0, "mode_width", "must be >= 0");
  require(calibration_distance > 0.0, "calibration_distance", "must be > 0");
  require(calibration_target > 0.0, "calibration_target", "must be > 0");
  require(k >= 1, "k", "must be >= 1");
  require(m >= 1, "m", "must be >= 1");
  require(optimal_shots >= 1, "optimal_shots", "must be >= 1");
  require(sigma_res >= 0.0, "sigma_res", "must be >= 0");
  require(gamma >= 0.0 && gamma <= 0.5, "gamma", "must lie in [0, 0.5]");
  for (double x : xi2_curves) require(x > 0.0 && x <= 1.0, "xi2_curves", "values must lie in (0, 1]");
  for (double x : xi2_grid) require(x > 0.0 && x <= 1.0, "xi2_grid", "values must lie in (0, 1]");
  require(omega_points >= 10, "omega_points", "must be >= 10");
  for (int n : n_list) require(n >= 2, "n_list", "values must be >= 2");
  require(fock_sigma > 0.0, "fock_sigma", "must be > 0");
  require(trials >= 1, "trials", "must be >= 1");
  require(threads >= 1, "threads", "must be >= 1");
  require(interval_lo >= 0.0 && interval_hi >= 0.0, "interval_lo", "must be >= 0");
  require(interval_hi == 0.0 || interval_hi > interval_lo, "interval_hi",
          "must exceed interval_lo");
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  using Setter = std::function<void()>;
  const std::map<std::string, Setter> setters = {
      {"N", [&] { cfg.particles = static_cast<int>(parse_integer(key, value)); }},
      {"ej_rate", [&] { cfg.ej_rate = parse_double(key, value); }},
      {"delta_rate", [&] { cfg.delta_rate = parse_double(key, value); }},
      {"state",
       [&] {
         if (value == "css") cfg.state = InputState::Css;
         else if (value == "gaussian") cfg.state = InputState::Gaussian;
         else if (value == "twin-fock") cfg.state = InputState::TwinFock;
         else bad_value(key, value, "expected css, gaussian or twin-fock");
       }},
      {"sigma", [&] { cfg.sigma = parse_double(key, value); }},
      {"l", [&] { cfg.well_separation = parse_double(key, value); }},
      {"epsilon0", [&] { cfg.epsilon0 = parse_double(key, value); }},
      {"alpha0", [&] { cfg.alpha0 = parse_double(key, value); }},
      {"d_grid", [&] { cfg.d_grid = parse_double_list(key, value); }},
      {"temperatures", [&] { cfg.temperatures = parse_double_list(key, value); }},
      {"mode_model", [&] { cfg.mode_model = value; }},
      {"mode_width", [&] { cfg.mode_width = parse_double(key, value); }},
      {"calibration_distance", [&] { cfg.calibration_distance = parse_double(key, value); }},
      {"calibration_target", [&] { cfg.calibration_target = parse_double(key, value); }},
      {"k", [&] { cfg.k = static_cast<int>(parse_integer(key, value)); }},
      {"m", [&] { cfg.m = static_cast<int>(parse_integer(key, value)); }},
      {"optimal_shots", [&] { cfg.optimal_shots = static_cast<int>(parse_integer(key, value)); }},
      {"sigma_res", [&] { cfg.sigma_res = parse_double(key, value); }},
      {"gamma", [&] { cfg.gamma = parse_double(key, value); }},
      {"xi2_curves", [&] { cfg.xi2_curves = parse_double_list(key, value); }},
      {"xi2_grid", [&] { cfg.xi2_grid = parse_double_list(key, value); }},
      {"omega_points", [&] { cfg.omega_points = static_cast<int>(parse_integer(key, value)); }},
      {"n_list",
       [&] {
         cfg.n_list.clear();
         for (const auto& item : split_list(value))
           cfg.n_list.push_back(static_cast<int>(parse_integer(key, item)));
         if (cfg.n_list.empty()) bad_value(key, value, "expected a non-empty list");
       }},
      {"fock_sigma", [&] { cfg.fock_sigma = parse_double(key, value); }},
      {"seed",
       [&] {
         const long long s = parse_integer(key, value);
         if (s < 0) bad_value(key, value, "must be >= 0");
         cfg.seed = static_cast<std::uint64_t>(s);
       }},
      {"trials", [&] { cfg.trials = static_cast<int>(parse_integer(key, value)); }},
      {"threads", [&] { cfg.threads = static_cast<int>(parse_integer(key, value)); }},
      {"mc", [&] { cfg.mc = parse_bool(key, value); }},
      {"interval_lo", [&] { cfg.interval_lo = parse_double(key, value); }},
      {"interval_hi", [&] { cfg.interval_hi = parse_double(key, value); }},
      {"record", [&] { cfg.record_path = value; }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second();
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  return {
      {"N", std::to_string(c.particles)},
      {"ej_rate", format_number(c.ej_rate)},
      {"delta_rate", format_number(c.delta_rate)},
      {"state", state_name(c.state)},
      {"sigma", format_number(c.sigma)},
      {"l", format_number(c.well_separation)},
      {"epsilon0", format_number(c.epsilon0)},
      {"alpha0", format_number(c.alpha0)},
      {"d_grid", join(c.d_grid)},
      {"temperatures", join(c.temperatures)},
      {"mode_model", c.mode_model},
      {"mode_width", format_number(c.mode_width)},
      {"calibration_distance", format_number(c.calibration_distance)},
      {"calibration_target", format_number(c.calibration_target)},
      {"k", std::to_string(c.k)},
      {"m", std::to_string(c.m)},
      {"optimal_shots", std::to_string(c.optimal_shots)},
      {"sigma_res", format_number(c.sigma_res)},
      {"gamma", format_number(c.gamma)},
      {"xi2_curves", join(c.xi2_curves)},
      {"xi2_grid", join(c.xi2_grid)},
      {"omega_points", std::to_string(c.omega_points)},
      {"n_list", join(c.n_list)},
      {"fock_sigma", format_number(c.fock_sigma)},
      {"seed", std::to_string(c.seed)},
      {"trials", std::to_string(c.trials)},
      {"threads", std::to_string(c.threads)},
      {"mc", c.mc ? "true" : "false"},
      {"interval_lo", format_number(c.interval_lo)},
      {"interval_hi", format_number(c.interval_hi)},
      {"record", c.record_path},
  };
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg, const std::string& source) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key before '='");
    if (key.rfind("meta.", 0) == 0) continue;
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in, std::move(base), path.string());
}

void write_manifest(std::ostream& os, const RunManifest& manifest) {
  os << "# run manifest; reproduce with: rabi " << manifest.subcommand
     << " --config <this file>\n";
  os << "meta.subcommand = " << manifest.subcommand << '\n';
  os << "meta.version = " << RABI_VERSION << '\n';
  for (std::size_t i = 0; i < manifest.outputs.size(); ++i)
    os << "meta.output." << i << " = " << manifest.outputs[i] << '\n';
  for (const auto& [key, value] : manifest.results) os << "meta.result." << key << " = " << value << '\n';
  for (const auto& [key, value] : config_entries(manifest.config)) os << key << " = " << value << '\n';
}

}  // namespace rabi
