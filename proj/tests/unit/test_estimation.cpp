#include "rabi/diagnostics.hpp"
#include "rabi/estimation.hpp"
#include "rabi/numerics.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace rabi;
using doctest::Approx;
using std::numbers::pi;

namespace {

const InterferometerParams kNominal(52.3, 4.4);
constexpr int kN = 2500;

const SpinMoments& css_moments() {
  static const SpinMoments m = moments(make_css(kN));
  return m;
}

double t_at(double phase, const InterferometerParams& p = kNominal) { return phase / p.omega(); }

}  // namespace

TEST_CASE("schedules") {
  const auto u = uniform_schedule(kNominal, 10, 10);
  REQUIRE(u.size() == 10);
  CHECK(u.repetitions == 10);
  CHECK(u.times.front() == Approx(kNominal.rabi_period() / 10).epsilon(1e-14));
  CHECK(u.times.back() == Approx(kNominal.rabi_period()).epsilon(1e-14));
  const auto o = optimal_point_schedule(kNominal, 100);
  CHECK(o.size() == 1);
  CHECK(o.times[0] == Approx(pi / kNominal.omega()));
  CHECK_THROWS_AS(uniform_schedule(kNominal, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(uniform_schedule(kNominal, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS((MeasurementSchedule{{0.1, 0.1}, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MeasurementSchedule{{0.0}, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MeasurementSchedule{{}, 1}.validate()), std::invalid_argument);
}

TEST_CASE("noise model validation") {
  CHECK_NOTHROW((NoiseModel{0.1, 40.0}.validate()));
  CHECK_THROWS_AS((NoiseModel{-0.1, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((NoiseModel{0.6, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((NoiseModel{0.0, -1.0}.validate()), std::invalid_argument);
}

TEST_CASE("shot density") {
  const auto& m = css_moments();
  const double t = t_at(pi);
  const auto clean = shot_probability(-200.0, t, m, kNominal, {}, 1);
  const double mu = mean_jz(m, kNominal, t), var = var_jz(m, kNominal, t);
  CHECK(clean.mean == Approx(mu));
  CHECK(clean.variance == Approx(var));
  CHECK(clean.density == Approx(std::exp(-0.5 * (-200.0 - mu) * (-200.0 - mu) / var) /
                                std::sqrt(2 * pi * var)));

  const auto noisy = shot_probability(0.0, t, m, kNominal, {0.0, 40.0}, 10);
  CHECK(noisy.variance == Approx((625.0 + 1600.0) / 10).epsilon(0.01));
  CHECK(noisy.variance == Approx((var + 1600.0) / 10).epsilon(1e-14));

  const auto total = numerics::integrate_adaptive(
      [&](double n) { return shot_probability(n, t, m, kNominal, {0.0, 40.0}, 10).density; },
      noisy.mean - 40 * std::sqrt(noisy.variance), noisy.mean + 40 * std::sqrt(noisy.variance),
      1e-12);
  CHECK(total.value == Approx(1.0).epsilon(1e-9));

  const auto fock = moments(make_twin_fock(100));
  const auto point = shot_probability(0.0, 0.0, fock, kNominal, {}, 1);
  CHECK(point.point_mass);
  CHECK(std::isinf(point.density));
  CHECK(shot_probability(1.0, 0.0, fock, kNominal, {}, 1).density == 0.0);
}

TEST_CASE("coherent-state sensitivity equals the closed form") {
  for (int i = 1; i < 50; ++i) {
    const double alpha = 0.5 * i / 50.0;
    const InterferometerParams p(std::cos(alpha) * 60.0, std::sin(alpha) * 60.0);
    const auto m = moments(make_css(400));
    for (int k = 1; k < 60; ++k) {
      const double phase = 4 * pi * k / 60.0;
      const double t = t_at(phase, p);
      const double d2 = single_time_sensitivity(m, p, t, 3);
      if (!std::isfinite(d2)) continue;
      const double closed = css_relative_sensitivity(400, p, t, 3) * p.delta_rate();
      CHECK(oracle::relative_difference(std::sqrt(d2), closed) < 1e-10);
    }
  }
}

TEST_CASE("optimal-point sensitivity of the coherent state") {
  const double t = t_at(pi);
  const double rel = std::sqrt(single_time_sensitivity(css_moments(), kNominal, t, 1)) / 4.4;
  CHECK(rel == Approx(0.1189).epsilon(1e-3 / 0.1189));
  CHECK(rel == Approx(1.0 / (2 * std::sqrt(double(kN)) * kNominal.sin_alpha() * kNominal.cos_alpha()))
                   .epsilon(1e-12));
  CHECK(css_relative_sensitivity_leading_order(kN, kNominal, t, 1) == Approx(0.11886).epsilon(1e-4));

  const double agg = schedule_sensitivity(css_moments(), kNominal, optimal_point_schedule(kNominal, 100));
  CHECK(agg / 4.4 == Approx(0.0119).epsilon(1e-4 / 0.0119));
  const double formula = squeezing_limited_relative_sensitivity(1.0, kN, kNominal, 100);
  CHECK(std::abs(agg / 4.4 / formula - 1.0) < 0.006);
}

TEST_CASE("sensitivity diverges where the signal has no slope") {
  CHECK(std::isinf(single_time_sensitivity(css_moments(), kNominal, 0.0, 1)));
  const double near_zero = single_time_sensitivity(css_moments(), kNominal, 1e-4, 1);
  CHECK(near_zero > 1e4 * single_time_sensitivity(css_moments(), kNominal, t_at(pi), 1));
  CHECK_THROWS_AS(single_time_sensitivity(css_moments(), kNominal, 0.1, 0), std::invalid_argument);
}

TEST_CASE("inverse-variance aggregation") {
  const std::vector<double> same(7, 0.09);
  CHECK(aggregate_sensitivity(same) == Approx(0.3 / std::sqrt(7.0)).epsilon(1e-14));

  std::vector<double> mixed = {0.4, 0.01, 2.5, 0.07, INFINITY, 0.3};
  const double base = aggregate_sensitivity(mixed);
  std::mt19937 rng(3);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(mixed.begin(), mixed.end(), rng);
    CHECK(aggregate_sensitivity(mixed) == Approx(base).epsilon(1e-14));
  }
  auto longer = mixed;
  for (double extra : {100.0, 1e-3, 5.0}) {
    longer.push_back(extra);
    CHECK(aggregate_sensitivity(longer) <= aggregate_sensitivity(mixed));
  }
  const std::vector<double> dead = {INFINITY, INFINITY};
  CHECK_THROWS_AS(aggregate_sensitivity(dead), NumericalError);
  const std::vector<double> bad = {0.1, NAN};
  CHECK_THROWS_AS(aggregate_sensitivity(bad), std::invalid_argument);
  CHECK_THROWS_AS(aggregate_sensitivity(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("records") {
  const auto schedule = uniform_schedule(kNominal, 10, 10);
  const NoiseModel noise{0.0, 40.0};
  const auto a = simulate_record(css_moments(), kNominal, schedule, noise, 42, 3);
  const auto b = simulate_record(css_moments(), kNominal, schedule, noise, 42, 3);
  const auto c = simulate_record(css_moments(), kNominal, schedule, noise, 42, 4);
  CHECK(a.n_mean == b.n_mean);
  CHECK(a.n_mean != c.n_mean);
  CHECK(a.times == schedule.times);

  const auto expected = expected_record(css_moments(), kNominal, schedule, noise);
  for (int i = 0; i < schedule.size(); ++i)
    CHECK(expected.n_mean[i] == mean_jz(css_moments(), kNominal, schedule.times[i]));
}

TEST_CASE("record statistics") {
  const MeasurementSchedule schedule{{t_at(2.0)}, 10};
  const NoiseModel noise{0.0, 40.0};
  const int trials = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double x = simulate_record(css_moments(), kNominal, schedule, noise, 9, i).n_mean[0];
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / trials;
  const double var = (sum_sq - trials * mean * mean) / (trials - 1);
  const double model_var = (var_jz(css_moments(), kNominal, schedule.times[0]) + 1600.0) / 10;
  CHECK(std::abs(mean - mean_jz(css_moments(), kNominal, schedule.times[0])) <
        3 * std::sqrt(model_var / trials));
  CHECK(var == Approx(model_var).epsilon(0.05));
}

TEST_CASE("fit recovers the truth from a noise-free record") {
  const auto schedule = uniform_schedule(kNominal, 10, 10);
  for (const NoiseModel noise : {NoiseModel{0.0, 0.0}, NoiseModel{0.0, 40.0}, NoiseModel{0.1, 40.0}}) {
    const auto record = expected_record(css_moments(), kNominal, schedule, noise);
    const auto fit = fit_ml(record, css_moments(), 52.3, schedule, noise, {2.2, 6.6});
    CHECK(fit.delta_est == Approx(4.4).epsilon(1e-6));
    double info = 0.0;
    for (double d2 : fit.per_time_sensitivity) info += 1.0 / d2;
    CHECK(fit.delta_err == Approx(1.0 / std::sqrt(info)).epsilon(1e-9));
    CHECK(fit.delta_err > 0.0);
    CHECK(fit.diagnostics.chi2 < 1e-9);
  }
}

TEST_CASE("least-squares and maximum-likelihood fits agree") {
  const auto schedule = uniform_schedule(kNominal, 10, 10);
  const NoiseModel noise{0.1, 40.0};
  for (std::uint64_t stream = 0; stream < 5; ++stream) {
    const auto record = simulate_record(css_moments(), kNominal, schedule, noise, 5, stream);
    const auto ml = fit_ml(record, css_moments(), 52.3, schedule, noise, {2.2, 6.6});
    FitOptions ls;
    ls.mode = FitMode::LeastSquares;
    const auto lsq = fit_ml(record, css_moments(), 52.3, schedule, noise, {2.2, 6.6}, ls);
    CHECK(std::abs(ml.delta_est - lsq.delta_est) < ml.delta_err / 10);
  }
}

TEST_CASE("fit failures") {
  const auto schedule = uniform_schedule(kNominal, 10, 10);
  const auto record = expected_record(css_moments(), kNominal, schedule, {});
  CHECK_THROWS_AS(fit_ml(record, css_moments(), 52.3, schedule, {}, {10.0, 20.0}), NumericalError);
  const auto fock = moments(make_twin_fock(100));
  const auto flat = expected_record(fock, kNominal, schedule, {});
  CHECK_THROWS_AS(fit_ml(flat, fock, 52.3, schedule, {}, {2.0, 6.0}), NumericalError);
  CHECK_THROWS_AS(fit_ml(record, css_moments(), 52.3, schedule, {}, {5.0, 4.0}),
                  std::invalid_argument);
  auto short_record = record;
  short_record.times.pop_back();
  short_record.n_mean.pop_back();
  CHECK_THROWS_AS(fit_ml(short_record, css_moments(), 52.3, schedule, {}, {2.0, 6.0}),
                  std::invalid_argument);
}

TEST_CASE("Monte-Carlo error matches the Fisher bound") {
  const auto schedule = uniform_schedule(kNominal, 10, 10);
  MonteCarloOptions options;
  options.trials = 400;
  options.seed = 77;
  options.threads = 4;
  for (double sigma_res : {0.0, 40.0}) {
    const NoiseModel noise{0.0, sigma_res};
    const auto mc = monte_carlo_fit(css_moments(), kNominal, schedule, noise, {2.2, 6.6}, options);
    const double bound = schedule_sensitivity(css_moments(), kNominal, schedule, noise);
    CHECK(mc.failures == 0);
    CHECK(mc.rmse == Approx(bound).epsilon(0.15));
    CHECK(std::abs(mc.bias) < 4 * bound / std::sqrt(400.0));
  }
}

TEST_CASE("Monte-Carlo results do not depend on the thread count") {
  const auto schedule = uniform_schedule(kNominal, 10, 10);
  MonteCarloOptions options;
  options.trials = 64;
  options.seed = 5;
  options.threads = 1;
  const auto serial = monte_carlo_fit(css_moments(), kNominal, schedule, {0.0, 40.0}, {2.2, 6.6}, options);
  options.threads = 6;
  const auto parallel = monte_carlo_fit(css_moments(), kNominal, schedule, {0.0, 40.0}, {2.2, 6.6}, options);
  CHECK(serial.estimates == parallel.estimates);
}

TEST_CASE("detection noise inflates the uniform-grid error about twofold") {
  const auto schedule = uniform_schedule(kNominal, 10, 10);
  const double clean = schedule_sensitivity(css_moments(), kNominal, schedule, {});
  const double noisy = schedule_sensitivity(css_moments(), kNominal, schedule, {0.0, 40.0});
  CHECK(noisy / clean > 1.85);
  CHECK(noisy / clean < 1.95);
}

TEST_CASE("scaling exponent") {
  std::vector<std::pair<int, double>> inverse;
  for (int n : {100, 200, 400, 800, 1600, 3200}) inverse.emplace_back(n, 1.0 / n);
  CHECK(scaling_exponent(inverse) == Approx(1.0).epsilon(1e-12));

  std::vector<std::pair<int, double>> css;
  const auto schedule = optimal_point_schedule(kNominal, 100);
  for (int n : {100, 200, 400, 800, 1600, 3200})
    css.emplace_back(n, schedule_sensitivity(moments(make_css(n)), kNominal, schedule));
  const double beta = scaling_exponent(css);
  CHECK(beta >= 0.45);
  CHECK(beta <= 0.55);

  const std::vector<std::pair<int, double>> constant_n = {{100, 1.0}, {100, 2.0}, {100, 3.0}, {100, 4.0}};
  CHECK_THROWS_AS(scaling_exponent(constant_n), std::invalid_argument);
  const std::vector<std::pair<int, double>> narrow = {{100, 1.0}, {200, 2.0}, {300, 3.0}, {400, 4.0}};
  CHECK_THROWS_AS(scaling_exponent(narrow), std::invalid_argument);
  const std::vector<std::pair<int, double>> bad = {{100, 1.0}, {200, 0.0}, {400, 3.0}, {3200, 4.0}};
  CHECK_THROWS_AS(scaling_exponent(bad), std::invalid_argument);
}

TEST_CASE("squeezing-limited expression") {
  const double v = squeezing_limited_relative_sensitivity(0.5, kN, kNominal, 100);
  CHECK(v == Approx(std::sqrt(0.5) * kNominal.omega() / (2 * 4.4 * 50 * 10)).epsilon(1e-14));
  CHECK(squeezing_limited_relative_sensitivity(1.0, kN, kNominal, 100) == Approx(0.011928).epsilon(1e-4));
}
