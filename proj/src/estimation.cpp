#include "rabi/estimation.hpp"

#include "rabi/diagnostics.hpp"
#include "rabi/numerics.hpp"
#include "rabi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace rabi {

void MeasurementSchedule::validate() const {
  if (times.empty()) throw std::invalid_argument("MeasurementSchedule: need k >= 1 times");
  if (repetitions < 1) throw std::invalid_argument("MeasurementSchedule: need m >= 1");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || !std::isfinite(times[i]))
      throw std::invalid_argument("MeasurementSchedule: times must be positive and finite");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("MeasurementSchedule: times must be strictly increasing");
  }
}

MeasurementSchedule uniform_schedule(const InterferometerParams& p, int k, int repetitions) {
  if (k < 1) throw std::invalid_argument("uniform_schedule: need k >= 1");
  MeasurementSchedule s;
  s.repetitions = repetitions;
  for (int i = 1; i <= k; ++i) s.times.push_back(2.0 * std::numbers::pi * i / (p.omega() * k));
  s.validate();
  return s;
}

MeasurementSchedule optimal_point_schedule(const InterferometerParams& p, int repetitions) {
  MeasurementSchedule s{{std::numbers::pi / p.omega()}, repetitions};
  s.validate();
  return s;
}

void NoiseModel::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("NoiseModel: gamma must be >= 0");
  if (!(gamma <= 0.5))
    throw std::invalid_argument("NoiseModel: gamma must be <= 0.5 (first-order expansion)");
  if (!(sigma_res >= 0.0)) throw std::invalid_argument("NoiseModel: sigma_res must be >= 0");
}

SignalPoint signal_at(const SpinMoments& m, const InterferometerParams& p, double t,
                      const NoiseModel& noise) {
  SignalPoint sp;
  sp.mean = mean_jz(m, p, t);
  sp.slope = mean_jz_ddelta(m, p, t);
  sp.variance = var_jz(m, p, t) + noise.sigma_res * noise.sigma_res;
  if (noise.gamma > 0.0) {
    const double ec = interaction_rate(noise.gamma, m.particles, p.ej_rate());
    const double delta = p.delta_rate();
    const double h = 1e-4 * std::max(std::abs(delta), 1e-3 * p.ej_rate());
    sp.mean += dyson_correction_unchecked(m, p, t, ec);
    sp.slope += (dyson_correction_unchecked(m, p.with_delta(delta + h), t, ec) -
                 dyson_correction_unchecked(m, p.with_delta(delta - h), t, ec)) /
                (2.0 * h);
  }
  return sp;
}

ShotDensity shot_probability(double n, double t, const SpinMoments& m,
                             const InterferometerParams& p, const NoiseModel& noise,
                             int repetitions) {
  if (repetitions < 1) throw std::invalid_argument("shot_probability: need m >= 1");
  const SignalPoint sp = signal_at(m, p, t, noise);
  ShotDensity out;
  out.mean = sp.mean;
  out.variance = std::max(sp.variance, 0.0) / repetitions;
  if (out.variance <= 0.0) {
    out.point_mass = true;
    out.density = (n == out.mean) ? std::numeric_limits<double>::infinity() : 0.0;
    return out;
  }
  const double z = n - out.mean;
  out.density = std::exp(-0.5 * z * z / out.variance) / std::sqrt(2.0 * std::numbers::pi * out.variance);
  return out;
}

namespace {

double sensitivity_from(const SignalPoint& sp, const SpinMoments& m, const InterferometerParams& p,
                        double t, int repetitions) {
  // Below this slope the signal carries no usable information.
  const double slope_floor = 1e-12 * std::max(m.spin_length(), 1.0) * (1.0 / p.omega() + t);
  if (!(std::abs(sp.slope) > slope_floor)) return std::numeric_limits<double>::infinity();
  return std::max(sp.variance, 0.0) / (repetitions * sp.slope * sp.slope);
}

}  // namespace

double single_time_sensitivity(const SpinMoments& m, const InterferometerParams& p, double t,
                               int repetitions, const NoiseModel& noise) {
  if (repetitions < 1) throw std::invalid_argument("single_time_sensitivity: need m >= 1");
  if (t < 0.0) throw std::invalid_argument("single_time_sensitivity: t must be >= 0");
  return sensitivity_from(signal_at(m, p, t, noise), m, p, t, repetitions);
}

std::vector<double> sensitivity_profile(const SpinMoments& m, const InterferometerParams& p,
                                        const MeasurementSchedule& schedule,
                                        const NoiseModel& noise) {
  schedule.validate();
  std::vector<double> out;
  out.reserve(schedule.times.size());
  for (double t : schedule.times)
    out.push_back(single_time_sensitivity(m, p, t, schedule.repetitions, noise));
  return out;
}

double aggregate_sensitivity(std::span<const double> per_time) {
  if (per_time.empty()) throw std::invalid_argument("aggregate_sensitivity: empty input");
  double information = 0.0;
  for (double v : per_time) {
    if (std::isnan(v) || v < 0.0)
      throw std::invalid_argument("aggregate_sensitivity: entries must be >= 0");
    if (std::isfinite(v)) information += 1.0 / v;
  }
  if (information == 0.0)
    throw NumericalError("aggregate_sensitivity: every time point is divergent (flat likelihood)");
  return 1.0 / std::sqrt(information);
}

double schedule_sensitivity(const SpinMoments& m, const InterferometerParams& p,
                            const MeasurementSchedule& schedule, const NoiseModel& noise) {
  return aggregate_sensitivity(sensitivity_profile(m, p, schedule, noise));
}

double squeezing_limited_relative_sensitivity(double xi2, int particles,
                                              const InterferometerParams& p, int total_shots) {
  return std::sqrt(xi2) * p.omega() /
         (2.0 * p.delta_rate() * std::sqrt(static_cast<double>(particles) * total_shots));
}

MeasurementRecord simulate_record(const SpinMoments& m, const InterferometerParams& p,
                                  const MeasurementSchedule& schedule, const NoiseModel& noise,
                                  std::uint64_t seed, std::uint64_t stream) {
  schedule.validate();
  noise.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  MeasurementRecord record;
  record.times = schedule.times;
  record.n_mean.reserve(schedule.times.size());
  for (double t : schedule.times) {
    const SignalPoint sp = signal_at(m, p, t, noise);
    const double shot_sd = std::sqrt(std::max(sp.variance, 0.0));
    double sum = 0.0;
    for (int shot = 0; shot < schedule.repetitions; ++shot) sum += sp.mean + shot_sd * normal(rng);
    record.n_mean.push_back(sum / schedule.repetitions);
  }
  return record;
}

MeasurementRecord expected_record(const SpinMoments& m, const InterferometerParams& p,
                                  const MeasurementSchedule& schedule, const NoiseModel& noise) {
  schedule.validate();
  MeasurementRecord record;
  record.times = schedule.times;
  for (double t : schedule.times) record.n_mean.push_back(signal_at(m, p, t, noise).mean);
  return record;
}

namespace {

struct Objective {
  const MeasurementRecord& record;
  const SpinMoments& moments;
  double ej_rate;
  int repetitions;
  const NoiseModel& noise;
  // Fixed per-shot variances for the least-squares mode; empty for ML.
  std::vector<double> fixed_variance;

  static double floor_variance(double v) { return std::max(v, 1e-12); }

  double operator()(double delta) const {
    const InterferometerParams p(ej_rate, delta);
    double total = 0.0;
    for (std::size_t i = 0; i < record.times.size(); ++i) {
      const SignalPoint sp = signal_at(moments, p, record.times[i], noise);
      const double r = record.n_mean[i] - sp.mean;
      const double v = fixed_variance.empty() ? sp.variance : fixed_variance[i];
      total += 0.5 * repetitions * r * r / floor_variance(v);
    }
    return total;
  }
};

std::vector<double> model_variances(const MeasurementRecord& record, const SpinMoments& m,
                                    double ej_rate, double delta, const NoiseModel& noise) {
  const InterferometerParams p(ej_rate, delta);
  std::vector<double> v;
  for (double t : record.times) v.push_back(signal_at(m, p, t, noise).variance);
  return v;
}

numerics::MinimizeResult scan_and_refine(const Objective& f, SearchInterval interval,
                                         const FitOptions& options) {
  const int points = std::max(options.scan_points, 3);
  const double step = (interval.hi - interval.lo) / (points - 1);
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  double worst_value = -best_value;
  for (int j = 0; j < points; ++j) {
    const double value = f(interval.lo + j * step);
    worst_value = std::max(worst_value, value);
    if (value < best_value) {
      best_value = value;
      best = j;
    }
  }
  if (!(worst_value - best_value > 1e-12 * std::max(std::abs(best_value), 1.0)))
    throw NumericalError("fit_ml: likelihood is flat over the search interval");
  if (best == 0 || best == points - 1) {
    std::ostringstream msg;
    msg << "fit_ml: optimum not bracketed by [" << interval.lo << ", " << interval.hi << "]";
    throw NumericalError(msg.str());
  }
  const double lo = interval.lo + (best - 1) * step;
  const double hi = interval.lo + (best + 1) * step;
  auto result = numerics::minimize_bounded(f, lo, hi, options.rel_tol, 1e-15);
  result.iterations += points;
  return result;
}

}  // namespace

EstimationResult fit_ml(const MeasurementRecord& record, const SpinMoments& m, double ej_rate,
                        const MeasurementSchedule& schedule, const NoiseModel& noise,
                        SearchInterval interval, const FitOptions& options) {
  schedule.validate();
  noise.validate();
  if (record.times != schedule.times || record.n_mean.size() != record.times.size())
    throw std::invalid_argument("fit_ml: record does not match the schedule");
  if (!(interval.hi > interval.lo))
    throw std::invalid_argument("fit_ml: search interval must satisfy lo < hi");

  Objective objective{record, m, ej_rate, schedule.repetitions, noise, {}};
  numerics::MinimizeResult best;
  if (options.mode == FitMode::MaximumLikelihood) {
    best = scan_and_refine(objective, interval, options);
  } else {
    objective.fixed_variance =
        model_variances(record, m, ej_rate, 0.5 * (interval.lo + interval.hi), noise);
    best = scan_and_refine(objective, interval, options);
    objective.fixed_variance = model_variances(record, m, ej_rate, best.x, noise);
    const int first_pass = best.iterations;
    best = scan_and_refine(objective, interval, options);
    best.iterations += first_pass;
  }

  EstimationResult result;
  result.delta_est = best.x;
  const InterferometerParams fitted(ej_rate, best.x);
  result.per_time_sensitivity = sensitivity_profile(m, fitted, schedule, noise);
  result.delta_err = aggregate_sensitivity(result.per_time_sensitivity);
  result.diagnostics.iterations = best.iterations;
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    const SignalPoint sp = signal_at(m, fitted, record.times[i], noise);
    const double r = record.n_mean[i] - sp.mean;
    const double v = Objective::floor_variance(sp.variance);
    result.diagnostics.chi2 += schedule.repetitions * r * r / v;
    result.diagnostics.neg_log_likelihood +=
        0.5 * schedule.repetitions * r * r / v +
        0.5 * std::log(2.0 * std::numbers::pi * v / schedule.repetitions);
  }
  return result;
}

double scaling_exponent(std::span<const std::pair<int, double>> results) {
  std::set<int> distinct;
  for (const auto& [n, err] : results) {
    if (n < 1 || !(err > 0.0) || !std::isfinite(err))
      throw std::invalid_argument("scaling_exponent: need N >= 1 and finite positive errors");
    distinct.insert(n);
  }
  if (distinct.size() < 4)
    throw std::invalid_argument("scaling_exponent: need at least 4 distinct N values");
  if (*distinct.rbegin() < 10 * *distinct.begin())
    throw std::invalid_argument("scaling_exponent: N values must span at least one decade");

  const double count = static_cast<double>(results.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [n, err] : results) {
    const double x = std::log(static_cast<double>(n)), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -slope;
}

MonteCarloSummary monte_carlo_fit(const SpinMoments& m, const InterferometerParams& p,
                                  const MeasurementSchedule& schedule, const NoiseModel& noise,
                                  SearchInterval interval, const MonteCarloOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("monte_carlo_fit: need trials >= 1");
  std::vector<double> estimates(options.trials, std::numeric_limits<double>::quiet_NaN());
  parallel_for(estimates.size(), options.threads, [&](std::size_t i) {
    const MeasurementRecord record = simulate_record(m, p, schedule, noise, options.seed, i);
    try {
      estimates[i] =
          fit_ml(record, m, p.ej_rate(), schedule, noise, interval, options.fit).delta_est;
    } catch (const NumericalError&) {
      // Counted as a failure below.
    }
  });

  MonteCarloSummary summary;
  const double truth = p.delta_rate();
  double sum = 0.0, sum_sq_err = 0.0;
  for (double e : estimates) {
    if (std::isnan(e)) {
      ++summary.failures;
      continue;
    }
    sum += e;
    sum_sq_err += (e - truth) * (e - truth);
  }
  const int ok = options.trials - summary.failures;
  if (ok == 0) throw NumericalError("monte_carlo_fit: every trial failed to fit");
  summary.mean = sum / ok;
  summary.bias = summary.mean - truth;
  summary.rmse = std::sqrt(sum_sq_err / ok);
  double var = 0.0;
  for (double e : estimates)
    if (!std::isnan(e)) var += (e - summary.mean) * (e - summary.mean);
  summary.std_dev = ok > 1 ? std::sqrt(var / (ok - 1)) : 0.0;
  summary.estimates = std::move(estimates);
  return summary;
}

}  // namespace rabi
