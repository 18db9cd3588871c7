#include "rabi/config.hpp"
#include "rabi/diagnostics.hpp"
#include "rabi/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rabi;

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--N", "N", "Particle number"},
    {"--ej-rate", "ej_rate", "Tunneling rate E_J/hbar [1/s]"},
    {"--delta-rate", "delta_rate", "Detuning rate delta/hbar [1/s]"},
    {"--state", "state", "Input state: css | gaussian | twin-fock"},
    {"--sigma", "sigma", "Gaussian width in Dicke index units (0: sqrt(N)/2)"},
    {"--l", "l", "Well separation [m]"},
    {"--epsilon0", "epsilon0", "Static dielectric constant of the plate"},
    {"--alpha0", "alpha0", "Static polarizability [m^3]"},
    {"--d", "d_grid", "Plate distance(s) [m], comma separated"},
    {"--temperatures", "temperatures", "Plate temperatures [K], comma separated"},
    {"--mode-model", "mode_model", "Mode model: point | gaussian | calibrated"},
    {"--mode-width", "mode_width", "Gaussian mode width [m] for --mode-model gaussian"},
    {"--calibration-distance", "calibration_distance", "Calibration distance [m]"},
    {"--calibration-target", "calibration_target", "Calibration target delta/hbar [1/s]"},
    {"--k", "k", "Number of measurement times"},
    {"--m", "m", "Repetitions per time"},
    {"--optimal-shots", "optimal_shots", "Total shots at the optimal point"},
    {"--sigma-res", "sigma_res", "Detection resolution [particles]"},
    {"--gamma", "gamma", "Interaction strength N E_C / E_J"},
    {"--xi2", "xi2_curves", "Squeezing values for fig2a, comma separated"},
    {"--xi2-grid", "xi2_grid", "Squeezing grid for fig2b, comma separated"},
    {"--omega-points", "omega_points", "Grid intervals over one period (fig2a)"},
    {"--n-list", "n_list", "Particle numbers for scaling, comma separated"},
    {"--fock-sigma", "fock_sigma", "Width of the squeezed family in scaling"},
    {"--seed", "seed", "Random seed"},
    {"--trials", "trials", "Monte-Carlo trials"},
    {"--interval-lo", "interval_lo", "Lower end of the fit search interval [1/s]"},
    {"--interval-hi", "interval_hi", "Upper end of the fit search interval [1/s]"},
    {"--record", "record", "Record CSV (t_s,n_mean) to fit"},
};

struct Subcommand {
  const char* name;
  const char* help;
};

constexpr Subcommand kSubcommands[] = {
    {"detuning", "Casimir-Polder detuning versus plate distance"},
    {"sensitivity", "Per-time sensitivity on the uniform schedule"},
    {"simulate", "Draw one measurement record"},
    {"fit", "Maximum-likelihood fit of a record"},
    {"fig1", "Detuning curves with error bars and discrimination significance"},
    {"fig2a", "Single-shot sensitivity versus Omega for several squeezing values"},
    {"fig2b", "Optimal-point versus uniform-grid sensitivity across squeezing"},
    {"scaling", "Particle-number scaling exponents"},
    {"crossover", "Time where the quadratic signal term takes over"},
};

struct CliState {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  bool mc = false;
  std::map<std::string, std::string> overrides;
};

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("RABI_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

std::ofstream open_output(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
  return out;
}

std::string fixed(double x, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

int execute(const std::string& sub, const CliState& cli, const CLI::App& app) {
  ExperimentConfig cfg;
  if (!cli.config_path.empty()) cfg = load_config(cli.config_path, cfg);
  for (const auto& [key, value] : cli.overrides) set_config_value(cfg, key, value);
  if (app.count("--threads")) set_config_value(cfg, "threads", std::to_string(cli.threads));
  if (cli.mc) cfg.mc = true;
  cfg.scenario = scenario_from_string(sub);
  cfg.validate();

  const fs::path dir = resolve_out_dir(cli.out_dir);
  const fs::path csv_path = dir / (sub + ".csv");
  const fs::path manifest_path = dir / (sub + ".manifest.txt");
  std::ofstream csv = open_output(csv_path);
  std::ofstream manifest_out = open_output(manifest_path);

  RunManifest manifest{sub, cfg, {csv_path.string()}, {}};
  auto& results = manifest.results;

  if (sub == "detuning") {
    const auto rows = run_detuning(cfg);
    write_detuning_csv(csv, cfg.temperatures, rows);
    for (const auto& r : rows) {
      std::cout << "d = " << format_number(r.d) << " m: delta/hbar 0K = " << fixed(r.delta_zero_t, 4)
                << " 1/s";
      for (std::size_t i = 0; i < r.delta_thermal.size(); ++i)
        std::cout << ", " << format_number(cfg.temperatures[i])
                  << "K = " << fixed(r.delta_thermal[i], 4) << " 1/s";
      std::cout << '\n';
    }
  } else if (sub == "sensitivity") {
    const auto res = run_sensitivity(cfg);
    write_sensitivity_csv(csv, res, cfg.delta_rate);
    results["delta_err_persec"] = format_number(res.aggregate);
    std::cout << "Delta delta_ML = " << fixed(res.aggregate, 6) << " 1/s (relative "
              << fixed(res.aggregate / cfg.delta_rate, 6) << ")\n";
  } else if (sub == "simulate") {
    write_record_csv(csv, run_simulate(cfg));
    std::cout << "record written to " << csv_path.string() << '\n';
  } else if (sub == "fit") {
    const auto res = run_fit(cfg);
    write_fit_csv(csv, res, cfg);
    results["delta_est_persec"] = format_number(res.delta_est);
    results["delta_err_persec"] = format_number(res.delta_err);
    std::cout << "delta_est = " << fixed(res.delta_est, 6) << " +/- " << fixed(res.delta_err, 6)
              << " 1/s\n";
  } else if (sub == "fig1") {
    const auto res = run_fig1(cfg);
    write_fig1_csv(csv, res);
    if (const auto& cal = res.surface.calibration) {
      results["calibrated_mode_width_m"] = format_number(cal->width);
      results["calibration_reached"] = cal->reached ? "true" : "false";
      results["calibration_achieved_persec"] = format_number(cal->achieved_rate);
    }
    results["mode_width_m"] = format_number(res.surface.setup.width);
    for (const auto& row : res.rows)
      if (std::abs(row.d - cfg.calibration_distance) < 1e-12) {
        results["significance_at_calibration_distance"] = format_number(row.significance);
        std::cout << "d = " << format_number(row.d) << " m: delta_0K = " << fixed(row.delta_zero_t, 4)
                  << " 1/s, err = " << fixed(row.err, 4)
                  << " 1/s, significance = " << fixed(row.significance, 2) << '\n';
      }
    std::cout << res.rows.size() << " rows written to " << csv_path.string() << '\n';
  } else if (sub == "fig2a") {
    const auto res = run_fig2a(cfg);
    write_fig2a_csv(csv, res);
    for (const auto& m : res.minima) {
      results["minimum_Omega_xi2_" + format_number(m.xi2)] = format_number(m.phase);
      results["minimum_rel_xi2_" + format_number(m.xi2)] = format_number(m.rel_sensitivity);
      std::cout << "xi2 = " << format_number(m.xi2) << ": minimum " << fixed(m.rel_sensitivity, 5)
                << " at Omega = " << fixed(m.phase, 4) << '\n';
    }
  } else if (sub == "fig2b") {
    const auto rows = run_fig2b(cfg);
    write_fig2b_csv(csv, rows);
    for (const auto& r : rows)
      std::cout << "xi2 = " << format_number(r.xi2) << ": optimal " << fixed(r.optimal, 6)
                << ", uniform " << fixed(r.uniform, 6) << ", ratio " << fixed(r.ratio, 3) << '\n';
  } else if (sub == "scaling") {
    const auto res = run_scaling(cfg);
    write_scaling_csv(csv, res);
    results["beta_css"] = format_number(res.beta_css);
    results["beta_family"] = format_number(res.beta_family);
    results["beta_family_formula"] = format_number(res.beta_family_formula);
    std::cout << "beta_css = " << fixed(res.beta_css, 4)
              << ", beta_family (error propagation) = " << fixed(res.beta_family, 4)
              << ", beta_family (squeezing formula) = " << fixed(res.beta_family_formula, 4)
              << '\n';
  } else if (sub == "crossover") {
    const double t_star = run_crossover(cfg);
    csv << "delta_persec,t_star_s\n"
        << format_number(cfg.delta_rate) << ',' << format_number(t_star) << '\n';
    results["t_star_s"] = format_number(t_star);
    std::cout << "t* = " << fixed(t_star, 2) << " s\n";
  }

  if (!csv) throw ConfigError("failed writing '" + csv_path.string() + "'");
  manifest.outputs.push_back(manifest_path.string());
  write_manifest(manifest_out, manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rabi interferometer sensitivity toolkit"};
  app.set_version_flag("--version", std::string(RABI_VERSION));
  app.require_subcommand(1);

  CliState cli;
  std::map<std::string, std::vector<std::pair<CLI::Option*, std::string>>> bound;
  std::map<std::string, std::map<std::string, std::string>> raw;

  for (const auto& [name, help] : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", cli.config_path, "key = value config file (manifests accepted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out-dir", cli.out_dir,
                    "Output directory (default: $RABI_OUTPUT_DIR or the working directory)");
    sub->add_option("--threads", cli.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--mc", cli.mc, "Validate fig1 error bars by Monte-Carlo RMSE");
    auto& values = raw[name];
    for (const auto& f : kFlags) {
      CLI::Option* opt = sub->add_option(f.flag, values[f.key], f.help);
      bound[name].emplace_back(opt, f.key);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (const auto& [name, help] : kSubcommands) {
    const CLI::App* sub = app.get_subcommand(name);
    if (!sub->parsed()) continue;
    for (const auto& [opt, key] : bound[name])
      if (opt->count()) cli.overrides[key] = raw[name][key];
    try {
      return execute(name, cli, *sub);
    } catch (const NumericalError& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return 3;
    } catch (const std::invalid_argument& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return 2;
    } catch (const std::domain_error& e) {
      std::cerr << "configuration error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    }
  }
  return 2;
}
