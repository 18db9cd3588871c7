#include "rabi/config.hpp"
#include "rabi/diagnostics.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace rabi;

namespace {

ExperimentConfig parse(const std::string& text, ExperimentConfig base = {}) {
  std::istringstream in(text);
  return parse_config(in, base, "test.cfg");
}

std::string config_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, value] : config_entries(cfg)) os << key << " = " << value << '\n';
  return os.str();
}

}  // namespace

TEST_CASE("empty input keeps defaults") {
  const auto cfg = parse("\n# nothing here\n   \n");
  CHECK(cfg.particles == 2500);
  CHECK(cfg.ej_rate == 52.3);
  CHECK(cfg.delta_rate == 4.4);
  CHECK(cfg.k == 10);
  CHECK(cfg.m == 10);
  CHECK(cfg.sigma_res == 40.0);
  CHECK(cfg.gamma == 0.1);
  CHECK(cfg.seed == 12345u);
  CHECK(cfg.state == InputState::Css);
  CHECK(cfg.temperatures == std::vector<double>{300.0, 600.0});
  CHECK(config_text(cfg) == config_text(ExperimentConfig{}));
}

TEST_CASE("assignments override individual keys") {
  const auto cfg = parse("N = 100   # fewer atoms\nstate=gaussian\nsigma = 0.5\nmc = true\n");
  CHECK(cfg.particles == 100);
  CHECK(cfg.state == InputState::Gaussian);
  CHECK(cfg.sigma == 0.5);
  CHECK(cfg.mc);
  CHECK(cfg.ej_rate == 52.3);
}

TEST_CASE("lists") {
  const auto cfg = parse("d_grid = 3e-6, 4e-6,5e-6\nn_list = 10,20\ntemperatures = 77\n");
  CHECK(cfg.d_grid == std::vector<double>{3e-6, 4e-6, 5e-6});
  CHECK(cfg.n_list == std::vector<int>{10, 20});
  CHECK(cfg.temperatures == std::vector<double>{77.0});
  CHECK_THROWS_AS(parse("n_list = \n"), ConfigError);
  CHECK_THROWS_AS(parse("d_grid = 1e-6,,2e-6\n"), ConfigError);
}

TEST_CASE("booleans") {
  for (const char* yes : {"true", "1", "yes", "on"}) CHECK(parse(std::string("mc = ") + yes).mc);
  for (const char* no : {"false", "0", "no", "off"}) CHECK_FALSE(parse(std::string("mc = ") + no).mc);
  CHECK_THROWS_AS(parse("mc = maybe"), ConfigError);
}

TEST_CASE("range errors name the key") {
  CHECK_THROWS_WITH_AS(parse("sigma_res = -1\n"), doctest::Contains("sigma_res"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("gamma = 0.7\n"), doctest::Contains("gamma"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("N = 0\n"), doctest::Contains("'N'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("state = twin-fock\nN = 7\n"), doctest::Contains("twin-Fock"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("xi2_grid = 0.5, 1.5\n"), doctest::Contains("xi2_grid"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("mode_model = smeared\n"), doctest::Contains("mode_model"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("interval_lo = 5\ninterval_hi = 4\n"), doctest::Contains("interval_hi"),
                       ConfigError);
  CHECK_THROWS_AS(parse("seed = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse("epsilon0 = 1\n"), ConfigError);
}

TEST_CASE("syntax errors carry the line number") {
  CHECK_THROWS_WITH_AS(parse("N = 100\nnot an assignment\n"), doctest::Contains("test.cfg:2:"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("\n\nN = abc\n"), doctest::Contains("test.cfg:3:"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("N = 12abc\n"), doctest::Contains("'N'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("bogus = 1\n"), doctest::Contains("unknown config key 'bogus'"),
                       ConfigError);
  CHECK_THROWS_AS(parse(" = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("ej_rate = nan\n"), ConfigError);
}

TEST_CASE("missing files") {
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/run.cfg"), doctest::Contains("cannot open"),
                       ConfigError);
}

TEST_CASE("manifests round-trip") {
  RunManifest manifest;
  manifest.subcommand = "fig1";
  manifest.config.particles = 400;
  manifest.config.seed = 7;
  manifest.config.sigma_res = 12.5;
  manifest.config.ej_rate = 0.1 + 0.2;
  manifest.config.d_grid = {4e-6, 1.0 / 3.0 * 1e-5};
  manifest.config.record_path = "/tmp/r.csv";
  manifest.config.mc = true;
  manifest.outputs = {"fig1.csv"};
  manifest.results = {{"calibration.width_m", "0"}};
  std::ostringstream os;
  write_manifest(os, manifest);
  const std::string text = os.str();
  CHECK(text.find("meta.subcommand = fig1\n") != std::string::npos);
  CHECK(text.find("meta.output.0 = fig1.csv\n") != std::string::npos);
  CHECK(text.find("meta.result.calibration.width_m = 0\n") != std::string::npos);
  CHECK(text.find("\nN = 400\n") != std::string::npos);

  const auto back = parse(text);
  CHECK(config_text(back) == config_text(manifest.config));
  CHECK(back.ej_rate == manifest.config.ej_rate);
  CHECK(back.d_grid == manifest.config.d_grid);
  CHECK(back.record_path == "/tmp/r.csv");
}

TEST_CASE("parsing layers on a base configuration") {
  ExperimentConfig base;
  base.particles = 100;
  base.sigma_res = 10.0;
  const auto cfg = parse("k = 5\n", base);
  CHECK(cfg.particles == 100);
  CHECK(cfg.sigma_res == 10.0);
  CHECK(cfg.k == 5);
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.0, 1.0, 52.3, 4.4, 0.1 + 0.2, 1e-300, 6.02214076e23, -3.5, 1.0 / 3.0}) {
    const std::string s = format_number(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(format_number(52.3) == "52.3");
  CHECK(format_number(4e-6) == "4e-06");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("scenario names") {
  for (auto s : {Scenario::Detuning, Scenario::Sensitivity, Scenario::Simulate, Scenario::Fit,
                 Scenario::Fig1, Scenario::Fig2a, Scenario::Fig2b, Scenario::Scaling,
                 Scenario::Crossover})
    CHECK(scenario_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(scenario_from_string("fig3"), ConfigError);
}
