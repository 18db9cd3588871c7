#include "rabi/diagnostics.hpp"
#include "rabi/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace rabi;
using doctest::Approx;
using std::numbers::pi;

namespace {

struct QuietWarnings {
  WarningHandler previous;
  QuietWarnings() { previous = set_warning_handler([](std::string_view) {}); }
  ~QuietWarnings() { set_warning_handler(previous); }
};

template <typename Write, typename Result>
std::string csv_of(Write write, const Result& r) {
  std::ostringstream os;
  write(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("crossover time") {
  const ExperimentConfig cfg;
  const double t_star = run_crossover(cfg);
  CHECK(t_star == Approx(2.7015).epsilon(1e-4));
  CHECK(t_star >= 2.4);
  CHECK(t_star <= 3.0);

  const InterferometerParams doubled(52.3, 8.8);
  CHECK(crossover_time(doubled) / t_star == Approx(0.25).epsilon(0.05));

  const InterferometerParams equal(52.3, 52.3);
  const double s = std::sqrt(0.5);
  CHECK(crossover_time(equal) == Approx(s / (0.5 * equal.omega())).epsilon(1e-14));
  CHECK(std::isinf(crossover_time(InterferometerParams(52.3, 0.0))));

  // At t* the condition (sin^2 a / cos a) Omega = 1 holds.
  const InterferometerParams p(52.3, 4.4);
  CHECK(p.sin_alpha() * p.sin_alpha() / p.cos_alpha() * p.phase(t_star) == Approx(1.0));
}

TEST_CASE("input states from the configuration") {
  ExperimentConfig cfg;
  cfg.particles = 64;
  CHECK(make_input_state(cfg).coeffs().isApprox(make_css(64).coeffs()));
  cfg.state = InputState::Gaussian;
  CHECK(make_input_state(cfg).coeffs().isApprox(make_gaussian_squeezed(64, 4.0).coeffs()));
  cfg.sigma = 1.5;
  CHECK(make_input_state(cfg).coeffs().isApprox(make_gaussian_squeezed(64, 1.5).coeffs()));
  cfg.state = InputState::TwinFock;
  CHECK(std::isnan(squeezing_or_nan(moments(make_input_state(cfg)))));
}

TEST_CASE("fig1 table") {
  QuietWarnings quiet;
  const ExperimentConfig cfg;
  const auto res = run_fig1(cfg);
  REQUIRE(res.rows.size() == cfg.d_grid.size());
  REQUIRE(res.surface.calibration.has_value());
  CHECK_FALSE(res.surface.calibration->reached);
  CHECK(res.surface.setup.mode_model == casimir::ModeModel::PointSample);

  for (const auto& row : res.rows) {
    REQUIRE(row.delta_thermal.size() == 2);
    CHECK(row.delta_thermal[1] == 2.0 * row.delta_thermal[0]);
    CHECK(row.err > 0.0);
    CHECK_FALSE(row.mc_rmse.has_value());
  }
  const auto& at4 = res.rows[2];
  CHECK(at4.d == 4e-6);
  CHECK(at4.delta_zero_t == Approx(4.4).epsilon(0.3));
  CHECK(at4.significance > 2.0);

  const std::string csv = csv_of(write_fig1_csv, res);
  CHECK(csv.rfind("d_m,delta_0K_persec,delta_300K_persec,delta_600K_persec,err_persec,significance\n", 0) == 0);
  ExperimentConfig threaded = cfg;
  threaded.threads = 4;
  CHECK(csv_of(write_fig1_csv, run_fig1(threaded)) == csv);
}

TEST_CASE("fig1 mode models") {
  QuietWarnings quiet;
  ExperimentConfig cfg;
  cfg.d_grid = {4e-6};
  cfg.mode_model = "gaussian";
  cfg.mode_width = 0.4e-6;
  const auto wide = run_fig1(cfg);
  CHECK(wide.surface.setup.width == 0.4e-6);
  cfg.mode_model = "point";
  const auto point = run_fig1(cfg);
  CHECK(wide.rows[0].delta_zero_t > point.rows[0].delta_zero_t);
  cfg.mode_model = "calibrated";
  cfg.calibration_target = 5.3;
  const auto calibrated = run_fig1(cfg);
  REQUIRE(calibrated.surface.calibration->reached);
  CHECK(calibrated.rows[0].delta_zero_t == Approx(5.3).epsilon(1e-9));
}

TEST_CASE("fig1 Monte-Carlo column") {
  ExperimentConfig cfg;
  cfg.d_grid = {4e-6};
  cfg.mode_model = "point";
  cfg.mc = true;
  cfg.trials = 300;
  cfg.threads = 4;
  const auto res = run_fig1(cfg);
  REQUIRE(res.rows[0].mc_rmse.has_value());
  CHECK(*res.rows[0].mc_rmse == Approx(res.rows[0].err).epsilon(0.2));
  CHECK(csv_of(write_fig1_csv, res).find(",mc_rmse_persec\n") != std::string::npos);
}

TEST_CASE("fig2a curves") {
  ExperimentConfig cfg;
  cfg.omega_points = 400;
  const auto res = run_fig2a(cfg);
  REQUIRE(res.minima.size() == 3);
  CHECK(res.points.size() == 3 * 401);
  for (const auto& m : res.minima) CHECK(std::abs(m.phase - pi) < 0.05);
  CHECK(res.minima[0].rel_sensitivity_at_pi == Approx(0.1189).epsilon(1e-3 / 0.1189));
  CHECK(res.minima[0].rel_sensitivity_at_pi > res.minima[1].rel_sensitivity_at_pi);
  CHECK(res.minima[1].rel_sensitivity_at_pi > res.minima[2].rel_sensitivity_at_pi);
  CHECK(res.points.front().divergent);
  CHECK(res.points.front().phase == 0.0);
  const std::string csv = csv_of(write_fig2a_csv, res);
  CHECK(csv.rfind("xi2,Omega,rel_sensitivity,status\n1,0,,divergent\n", 0) == 0);
}

TEST_CASE("fig2b strategies") {
  const ExperimentConfig cfg;
  const auto rows = run_fig2b(cfg);
  REQUIRE(rows.size() == cfg.xi2_grid.size());
  const auto& css = rows.back();
  CHECK(css.xi2 == 1.0);
  CHECK(css.optimal == Approx(0.0119).epsilon(1e-4 / 0.0119));
  for (const auto& r : rows) {
    CHECK(r.uniform > r.optimal);
    CHECK(r.ratio < 10.0);
  }
  // Log-log slope in xi^2 over the moderately squeezed part of the grid.
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].xi2 < 0.1) continue;
    const double slope = std::log(rows[i + 1].optimal / rows[i].optimal) /
                         std::log(rows[i + 1].xi2 / rows[i].xi2);
    CHECK(slope == Approx(0.5).epsilon(0.02));
  }
  CHECK(csv_of(write_fig2b_csv, rows).rfind("xi2,optimal_rel,uniform_rel,ratio,formula_rel\n", 0) == 0);
}

TEST_CASE("particle-number scaling") {
  const ExperimentConfig cfg;
  const auto res = run_scaling(cfg);
  REQUIRE(res.rows.size() == 6);
  CHECK(res.beta_css == Approx(0.5).epsilon(0.01));
  CHECK(res.beta_family_formula >= 0.9);
  CHECK(res.beta_family_formula <= 1.05);
  for (const auto& r : res.rows) CHECK(r.family_xi2 == Approx(std::exp(1.0) / r.particles).epsilon(0.15));
}

TEST_CASE("particle-number override reaches the pipelines") {
  ExperimentConfig cfg;
  cfg.particles = 100;
  cfg.xi2_grid = {0.1, 0.5, 1.0};
  const auto rows = run_fig2b(cfg);
  const InterferometerParams p(cfg.ej_rate, cfg.delta_rate);
  CHECK(rows.back().formula == Approx(squeezing_limited_relative_sensitivity(1.0, 100, p, 100)));
  CHECK(rows.back().optimal == Approx(0.0119 * 5).epsilon(0.01));
  CHECK(run_sensitivity(cfg).aggregate > 4.0 * run_sensitivity(ExperimentConfig{}).aggregate);
}

TEST_CASE("record round trip and fitting") {
  ExperimentConfig cfg;
  const auto record = run_simulate(cfg);
  CHECK(record.times.size() == 10);
  std::stringstream buffer;
  write_record_csv(buffer, record);
  const auto back = read_record_csv(buffer);
  CHECK(back.times == record.times);
  CHECK(back.n_mean == record.n_mean);

  const auto path = std::filesystem::temp_directory_path() / "rabi_test_record.csv";
  {
    std::ofstream out(path);
    write_record_csv(out, record);
  }
  cfg.record_path = path.string();
  const auto fit = run_fit(cfg);
  CHECK(std::abs(fit.delta_est - 4.4) < 4 * fit.delta_err);
  std::ostringstream os;
  write_fit_csv(os, fit, cfg);
  CHECK(os.str().rfind("delta_est_persec,delta_err_persec,k,m,xi2,sigma_res,gamma,seed\n", 0) == 0);
  CHECK(os.str().find(",10,10,") != std::string::npos);
  CHECK(os.str().find(",40,0.1,12345\n") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("malformed records") {
  std::istringstream no_header("1,2\n");
  CHECK_THROWS_AS(read_record_csv(no_header), ConfigError);
  std::istringstream junk("t_s,n_mean\n0.1,abc\n");
  CHECK_THROWS_WITH_AS(read_record_csv(junk, "r.csv"), doctest::Contains("r.csv:2"), ConfigError);
  std::istringstream empty("t_s,n_mean\n");
  CHECK_THROWS_AS(read_record_csv(empty), ConfigError);
  ExperimentConfig cfg;
  CHECK_THROWS_AS(run_fit(cfg), ConfigError);
  cfg.record_path = "/nonexistent/record.csv";
  CHECK_THROWS_AS(run_fit(cfg), ConfigError);
}

TEST_CASE("detuning and sensitivity tables") {
  ExperimentConfig cfg;
  cfg.d_grid = {4e-6};
  cfg.mode_model = "point";
  const auto rows = run_detuning(cfg);
  std::ostringstream os;
  write_detuning_csv(os, cfg.temperatures, rows);
  CHECK(os.str().rfind("d_m,delta_0K_persec,delta_300K_persec,delta_600K_persec\n4e-06,5.13", 0) == 0);

  const auto sens = run_sensitivity(cfg);
  CHECK(sens.rows.size() == 10);
  CHECK(std::isfinite(sens.aggregate));
}
