#pragma once

// Casimir-Polder atom-surface potentials (retarded zero-temperature and
// thermal asymptotes) and the double-well detuning they induce.
//
// Geometry: wells at x = -l/2 (well a, nearer the plate) and x = +l/2
// (well b). The plate surface sits at x = -l/2 - d, so an atom at x is a
// distance x + l/2 + d from it. SI units throughout.

#include <optional>
#include <string>
#include <vector>

namespace rabi::casimir {

/// CODATA 2018 exact/recommended values.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;      // J s
  static constexpr double c_light = 299792458.0;       // m / s
  static constexpr double k_boltzmann = 1.380649e-23;  // J / K
};

enum class ModeModel { PointSample, Gaussian };

struct SurfaceSetup {
  double d = 4e-6;            // plate to near-well distance, m
  double l = 4.8e-6;          // well separation, m
  double epsilon0 = 9.4;      // static dielectric constant of the plate
  double alpha0 = 47.3e-30;   // static polarizability, m^3
  double temperature = 0.0;   // plate temperature, K
  ModeModel mode_model = ModeModel::PointSample;
  double width = 0.0;         // Gaussian mode width (std. dev. of |psi|^2), m

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  SurfaceSetup with_distance(double new_d) const;
  SurfaceSetup with_temperature(double t_kelvin) const;
  SurfaceSetup with_gaussian_width(double w) const;
};

enum class Potential { ZeroTemperature, Thermal };

/// Distance from the plate of an atom at x; throws std::domain_error if <= 0.
double plate_separation(double x, const SurfaceSetup& s);

/// -0.24 hbar c alpha0 / r^4 * (eps0 - 1)/(eps0 + 1).
double v_cp_zero_temperature(double x, const SurfaceSetup& s);

/// -k_B T alpha0 / (4 r^3) * (eps0 - 1)/(eps0 + 1). Requires T > 0.
double v_cp_thermal(double x, const SurfaceSetup& s);

double potential(double x, const SurfaceSetup& s, Potential choice);

/// hbar c / (k_B T).
double thermal_wavelength(double temperature);

/// Plate separation where the thermal and zero-temperature laws have
/// equal magnitude: 0.96 lambda_th.
double regime_crossover_separation(double temperature);

/// delta/hbar = (<V>_b - <V>_a) / (2 hbar) in 1/s; positive for an
/// attractive plate. <V>_{a,b} are mode averages: point values at the well
/// centers, or averages over Gaussian densities truncated at
/// +/- min(6w, 0.9d) and renormalized (adaptive quadrature, rel. tol 1e-9).
double detuning(const SurfaceSetup& s, Potential choice);

struct DetuningRow {
  double d = 0.0;
  double delta_zero_t = 0.0;
  std::vector<double> delta_thermal;  // one entry per requested temperature
};

std::vector<DetuningRow> detuning_curve(const std::vector<double>& d_grid, const SurfaceSetup& s,
                                        const std::vector<double>& temperatures);

struct CalibrationResult {
  double width = 0.0;           // m
  double achieved_rate = 0.0;   // delta/hbar at the calibration distance, 1/s
  bool reached = false;         // false: target outside the reachable range
  std::string note;
};

/// Solves for the Gaussian mode width that makes the zero-temperature
/// detuning at s.d equal target_rate. Broadening only increases the
/// detuning (the potential is convex), so targets below the point-sample
/// value are unreachable; the closest admissible width is then returned
/// with reached == false.
CalibrationResult calibrate_mode_width(const SurfaceSetup& s, double target_rate);

}  // namespace rabi::casimir
