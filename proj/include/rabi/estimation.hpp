#pragma once

// Measurement model, Fisher-information sensitivity, Monte-Carlo records
// and maximum-likelihood estimation of the detuning delta/hbar.
//
// Each of the k measurement times t_i is repeated m times. A single shot of
// the population imbalance is Gaussian with mean <Jz(t_i, delta)> and
// variance Var Jz(t_i, delta) + sigma_res^2 (detection noise convolves
// each shot); the record keeps the sample mean of the m shots.

#include "rabi/dynamics.hpp"
#include "rabi/spin_states.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rabi {

struct MeasurementSchedule {
  std::vector<double> times;  // s, strictly positive and increasing
  int repetitions = 1;        // m

  int size() const { return static_cast<int>(times.size()); }
  void validate() const;
};

/// k points t_i = 2 pi i / (omega k), i = 1..k, spanning the first Rabi period.
MeasurementSchedule uniform_schedule(const InterferometerParams& p, int k, int repetitions);

/// All repetitions at the working point t = pi / omega.
MeasurementSchedule optimal_point_schedule(const InterferometerParams& p, int repetitions);

struct NoiseModel {
  double gamma = 0.0;      // N E_C / E_J
  double sigma_res = 0.0;  // detection resolution, particles

  void validate() const;
};

/// Model prediction at one time: mean and per-shot variance of the
/// imbalance, and the slope d<Jz>/d(delta/hbar).
struct SignalPoint {
  double mean = 0.0;
  double variance = 0.0;
  double slope = 0.0;
};

/// With gamma > 0 the mean includes the first-order interaction correction
/// (slope by central differences); the variance is the non-interacting one.
SignalPoint signal_at(const SpinMoments& m, const InterferometerParams& p, double t,
                      const NoiseModel& noise);

struct ShotDensity {
  double mean = 0.0;
  double variance = 0.0;   // of the m-shot sample mean
  double density = 0.0;
  bool point_mass = false; // zero variance: density is a Dirac delta at mean
};

/// Gaussian density of the m-shot sample mean n at time t.
ShotDensity shot_probability(double n, double t, const SpinMoments& m,
                             const InterferometerParams& p, const NoiseModel& noise,
                             int repetitions);

/// Delta^2 delta(t) = Var / (m slope^2), in (1/s)^2. Returns +infinity where
/// the slope vanishes (no information, e.g. t = 0).
double single_time_sensitivity(const SpinMoments& m, const InterferometerParams& p, double t,
                               int repetitions, const NoiseModel& noise = {});

std::vector<double> sensitivity_profile(const SpinMoments& m, const InterferometerParams& p,
                                        const MeasurementSchedule& schedule,
                                        const NoiseModel& noise = {});

/// Inverse-variance aggregation (sum_i 1/Delta^2 delta_i)^(-1/2). Infinite
/// entries carry no information; all-infinite input throws NumericalError.
double aggregate_sensitivity(std::span<const double> per_time);

/// Delta delta_ML for a schedule (aggregate of the sensitivity profile).
double schedule_sensitivity(const SpinMoments& m, const InterferometerParams& p,
                            const MeasurementSchedule& schedule, const NoiseModel& noise = {});

/// Optimal-point expression for symmetric inputs,
/// xi omega / (2 delta sqrt(N) sqrt(m k)), as relative error.
double squeezing_limited_relative_sensitivity(double xi2, int particles,
                                              const InterferometerParams& p, int total_shots);

struct MeasurementRecord {
  std::vector<double> times;
  std::vector<double> n_mean;
};

/// Draws one record at the true detuning p.delta_rate(). The random stream
/// is a pure function of (seed, stream), so records are reproducible and
/// independent of execution order.
MeasurementRecord simulate_record(const SpinMoments& m, const InterferometerParams& p,
                                  const MeasurementSchedule& schedule, const NoiseModel& noise,
                                  std::uint64_t seed, std::uint64_t stream = 0);

/// Record holding the exact model means (no sampling noise).
MeasurementRecord expected_record(const SpinMoments& m, const InterferometerParams& p,
                                  const MeasurementSchedule& schedule, const NoiseModel& noise);

enum class FitMode {
  // Residuals weighted by the delta-dependent model variance; the Gaussian
  // normalization term is left out, so an exact record is fitted exactly.
  MaximumLikelihood,
  LeastSquares,       // fixed weights, reweighted once at the estimate
};

struct FitOptions {
  FitMode mode = FitMode::MaximumLikelihood;
  double rel_tol = 1e-9;
  int scan_points = 64;
};

struct FitDiagnostics {
  int iterations = 0;
  double neg_log_likelihood = 0.0;  // full Gaussian, at the estimate
  double chi2 = 0.0;  // sum of squared standardized residuals
};

struct EstimationResult {
  double delta_est = 0.0;  // 1/s
  double delta_err = 0.0;  // Delta delta_ML at delta_est, 1/s
  std::vector<double> per_time_sensitivity;
  FitDiagnostics diagnostics;
};

struct SearchInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Maximum-likelihood fit of delta/hbar with E_J known. A coarse scan picks
/// the best cell, then Brent's method refines it. Throws NumericalError
/// when the optimum sits on the interval boundary or the likelihood is flat.
EstimationResult fit_ml(const MeasurementRecord& record, const SpinMoments& m, double ej_rate,
                        const MeasurementSchedule& schedule, const NoiseModel& noise,
                        SearchInterval interval, const FitOptions& options = {});

/// beta in Delta delta ~ N^-beta from a least-squares fit in log-log space.
double scaling_exponent(std::span<const std::pair<int, double>> results);

struct MonteCarloSummary {
  std::vector<double> estimates;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double std_dev = 0.0;
  int failures = 0;
};

struct MonteCarloOptions {
  int trials = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  FitOptions fit{};
};

/// Repeated simulate_record + fit_ml around the true p.delta_rate(). Trial
/// i uses stream i, so results do not depend on the thread count.
MonteCarloSummary monte_carlo_fit(const SpinMoments& m, const InterferometerParams& p,
                                  const MeasurementSchedule& schedule, const NoiseModel& noise,
                                  SearchInterval interval, const MonteCarloOptions& options);

}  // namespace rabi
