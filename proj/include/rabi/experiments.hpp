#pragma once

// Pipelines that assemble states, dynamics, surface physics and estimation
// into plot-ready tables. Every pipeline is deterministic for a fixed
// config; row order follows input order regardless of --threads.

#include "rabi/casimir.hpp"
#include "rabi/config.hpp"
#include "rabi/estimation.hpp"
#include "rabi/spin_states.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rabi {

/// Input state selected by cfg.state (Gaussian width 0 means sqrt(N)/2).
DickeState make_input_state(const ExperimentConfig& cfg);

/// xi^2 of the moments, NaN when undefined (<Jx> = 0).
double squeezing_or_nan(const SpinMoments& m);

SearchInterval search_interval(const ExperimentConfig& cfg, double delta_rate);

/// Surface setup with the mode model resolved: point sample, a fixed
/// Gaussian width, or the width calibrated against calibration_target.
struct ResolvedSurface {
  casimir::SurfaceSetup setup;
  std::optional<casimir::CalibrationResult> calibration;
};

ResolvedSurface resolve_surface(const ExperimentConfig& cfg);

// ---------------------------------------------------------------- fig1

struct Fig1Row {
  double d = 0.0;
  double delta_zero_t = 0.0;
  std::vector<double> delta_thermal;  // one per cfg.temperatures
  double err = 0.0;                   // Delta delta_ML at delta_zero_t
  double significance = 0.0;          // |delta_thermal[0] - delta_zero_t| / err
  std::optional<double> mc_rmse;
};

struct Fig1Result {
  std::vector<double> temperatures;
  std::vector<Fig1Row> rows;
  ResolvedSurface surface;
};

Fig1Result run_fig1(const ExperimentConfig& cfg);
void write_fig1_csv(std::ostream& os, const Fig1Result& result);

// --------------------------------------------------------------- fig2a

struct Fig2aPoint {
  double xi2 = 0.0;
  double phase = 0.0;  // Omega
  double rel_sensitivity = 0.0;
  bool divergent = false;
};

struct Fig2aMinimum {
  double xi2 = 0.0;
  double phase = 0.0;
  double rel_sensitivity = 0.0;
  double rel_sensitivity_at_pi = 0.0;
};

struct Fig2aResult {
  std::vector<Fig2aPoint> points;  // grouped by curve, Omega ascending
  std::vector<Fig2aMinimum> minima;
};

/// Single-shot (m = 1) relative sensitivity over Omega in [0, 2 pi] for
/// each xi^2 in cfg.xi2_curves, noise-free. Minima are refined by Brent's
/// method around the best grid cell.
Fig2aResult run_fig2a(const ExperimentConfig& cfg);
void write_fig2a_csv(std::ostream& os, const Fig2aResult& result);

// --------------------------------------------------------------- fig2b

struct Fig2bRow {
  double xi2 = 0.0;
  double optimal = 0.0;  // Delta delta_ML / delta, optimal_shots at pi/omega
  double uniform = 0.0;  // Delta delta_ML / delta, k x m uniform grid
  double ratio = 0.0;    // uniform / optimal
  double formula = 0.0;  // xi omega / (2 delta sqrt(N) sqrt(mk))
};

std::vector<Fig2bRow> run_fig2b(const ExperimentConfig& cfg);
void write_fig2b_csv(std::ostream& os, const std::vector<Fig2bRow>& rows);

// ------------------------------------------------------------- scaling

struct ScalingRow {
  int particles = 0;
  double css_err = 0.0;        // optimal-point Delta delta_ML, 1/s
  double family_err = 0.0;     // same for the Gaussian family at cfg.fock_sigma
  double family_xi2 = 0.0;     // exact-moment xi^2 of that state
  double family_formula = 0.0; // squeezing-limited Delta delta_ML, 1/s
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double beta_css = 0.0;
  double beta_family = 0.0;          // from the exact error-propagation values
  double beta_family_formula = 0.0;  // from the squeezing-limited expression
};

ScalingResult run_scaling(const ExperimentConfig& cfg);
void write_scaling_csv(std::ostream& os, const ScalingResult& result);

// ----------------------------------------------------------- crossover

/// Time where (sin^2 a / cos a) Omega = 1, i.e. cos a / (sin^2 a omega).
double crossover_time(const InterferometerParams& p);
double run_crossover(const ExperimentConfig& cfg);

// ------------------------------------------------------ single-purpose

std::vector<casimir::DetuningRow> run_detuning(const ExperimentConfig& cfg);
void write_detuning_csv(std::ostream& os, const std::vector<double>& temperatures,
                        const std::vector<casimir::DetuningRow>& rows);

struct SensitivityRow {
  double t = 0.0;
  double delta2 = 0.0;  // (1/s)^2, infinite where divergent
};

struct SensitivityResult {
  std::vector<SensitivityRow> rows;
  double aggregate = 0.0;  // Delta delta_ML, 1/s
};

/// Per-time sensitivity on the uniform k x m schedule with configured noise.
SensitivityResult run_sensitivity(const ExperimentConfig& cfg);
void write_sensitivity_csv(std::ostream& os, const SensitivityResult& result, double delta_rate);

MeasurementRecord run_simulate(const ExperimentConfig& cfg);
void write_record_csv(std::ostream& os, const MeasurementRecord& record);
/// Reads a `t_s,n_mean` table; throws ConfigError on malformed input.
MeasurementRecord read_record_csv(std::istream& is, const std::string& source = "<record>");

/// Fits cfg.record_path (required) with the configured state and noise.
EstimationResult run_fit(const ExperimentConfig& cfg);
void write_fit_csv(std::ostream& os, const EstimationResult& result, const ExperimentConfig& cfg);

}  // namespace rabi
