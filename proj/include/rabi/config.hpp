#pragma once

// Run configuration: default parameter set, overridable from a
// `key = value` text file and then from command-line flags.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rabi {

enum class Scenario { Detuning, Sensitivity, Simulate, Fit, Fig1, Fig2a, Fig2b, Scaling, Crossover };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

enum class InputState { Css, Gaussian, TwinFock };

/// Shortest decimal text that parses back to the same double.
std::string format_number(double x);

struct ExperimentConfig {
  Scenario scenario = Scenario::Fig1;

  // Interferometer
  int particles = 2500;
  double ej_rate = 52.3;     // 1/s
  double delta_rate = 4.4;   // 1/s
  InputState state = InputState::Css;
  double sigma = 0.0;        // Gaussian width; 0 selects sqrt(N)/2

  // Surface
  double well_separation = 4.8e-6;  // m
  double epsilon0 = 9.4;
  double alpha0 = 47.3e-30;         // m^3
  std::vector<double> d_grid = {3.0e-6, 3.5e-6, 4.0e-6, 4.5e-6, 5.0e-6, 5.5e-6, 6.0e-6, 6.5e-6,
                                7.0e-6, 7.5e-6, 8.0e-6, 8.5e-6, 9.0e-6, 9.5e-6, 10.0e-6};
  std::vector<double> temperatures = {300.0, 600.0};
  std::string mode_model = "calibrated";  // point | gaussian | calibrated
  double mode_width = 0.0;                // m, used by mode_model = gaussian
  double calibration_distance = 4.0e-6;   // m
  double calibration_target = 4.4;        // 1/s

  // Measurement
  int k = 10;
  int m = 10;
  int optimal_shots = 100;
  double sigma_res = 40.0;
  double gamma = 0.1;

  // Squeezing studies
  std::vector<double> xi2_curves = {1.0, 0.5, 0.017};
  std::vector<double> xi2_grid = {0.017, 0.03, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.58, 0.7, 0.85, 1.0};
  int omega_points = 2000;
  std::vector<int> n_list = {100, 200, 400, 800, 1600, 3200};
  double fock_sigma = 0.5;

  // Monte Carlo and fitting
  std::uint64_t seed = 12345;
  int trials = 1000;
  int threads = 1;
  bool mc = false;
  double interval_lo = 0.0;  // 0 selects 0.5 delta
  double interval_hi = 0.0;  // 0 selects 1.5 delta
  std::string record_path;

  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

/// Applies one `key = value` assignment with range checking. Throws
/// ConfigError naming the key on unknown keys or bad values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// All settable keys with their current values, in a stable order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);

/// Parses `key = value` lines ('#' starts a comment, blank lines ignored)
/// on top of `base`. Keys under `meta.` are accepted and ignored so run
/// manifests can be fed back in. Errors carry the line number.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {},
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Everything needed to reproduce a run.
struct RunManifest {
  std::string subcommand;
  ExperimentConfig config;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> results;  // e.g. calibrated width, betas
};

void write_manifest(std::ostream& os, const RunManifest& manifest);

}  // namespace rabi
