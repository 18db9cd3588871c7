#include "rabi/casimir.hpp"

#include "rabi/diagnostics.hpp"
#include "rabi/numerics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rabi::casimir {
namespace {

using C = PhysicalConstants;

double dielectric_factor(const SurfaceSetup& s) { return (s.epsilon0 - 1.0) / (s.epsilon0 + 1.0); }

double max_width(const SurfaceSetup& s) { return std::min(s.l / 4.0, s.d / 3.0); }

// Average of the potential over a Gaussian density centered at `center`.
double gaussian_average(double center, const SurfaceSetup& s, Potential choice) {
  const double w = s.width;
  const double half = std::min(6.0 * w, 0.9 * s.d);
  auto weighted = [&](double x) {
    const double z = (x - center) / w;
    return std::exp(-0.5 * z * z) * potential(x, s, choice);
  };
  // Split at the center so both tails are resolved.
  const auto left = numerics::integrate_adaptive(weighted, center - half, center, 1e-11);
  const auto right = numerics::integrate_adaptive(weighted, center, center + half, 1e-11);
  const double mass = w * std::sqrt(2.0 * std::numbers::pi) * std::erf(half / (w * std::sqrt(2.0)));
  return (left.value + right.value) / mass;
}

double mode_average(double center, const SurfaceSetup& s, Potential choice) {
  if (s.mode_model == ModeModel::Gaussian && s.width > 0.0)
    return gaussian_average(center, s, choice);
  return potential(center, s, choice);
}

}  // namespace

void SurfaceSetup::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("SurfaceSetup: " + what); };
  if (!(d > 0.0)) fail("d must be > 0");
  if (!(l > 0.0)) fail("l must be > 0");
  if (!(epsilon0 > 1.0)) fail("epsilon0 must be > 1");
  if (!(alpha0 > 0.0)) fail("alpha0 must be > 0");
  if (!(temperature >= 0.0)) fail("temperature must be >= 0");
  if (mode_model == ModeModel::Gaussian) {
    if (!(width >= 0.0)) fail("width must be >= 0");
    if (!(width < l / 4.0)) fail("gaussian width must be < l/4");
    if (width > d / 3.0) fail("gaussian width must be <= d/3 (tail would reach the plate)");
  }
}

SurfaceSetup SurfaceSetup::with_distance(double new_d) const {
  SurfaceSetup s = *this;
  s.d = new_d;
  return s;
}

SurfaceSetup SurfaceSetup::with_temperature(double t_kelvin) const {
  SurfaceSetup s = *this;
  s.temperature = t_kelvin;
  return s;
}

SurfaceSetup SurfaceSetup::with_gaussian_width(double w) const {
  SurfaceSetup s = *this;
  s.mode_model = ModeModel::Gaussian;
  s.width = w;
  return s;
}

double plate_separation(double x, const SurfaceSetup& s) {
  const double r = x + 0.5 * s.l + s.d;
  if (!(r > 0.0)) {
    std::ostringstream msg;
    msg << "non-physical geometry: atom at x = " << x << " m is not outside the plate";
    throw std::domain_error(msg.str());
  }
  return r;
}

double v_cp_zero_temperature(double x, const SurfaceSetup& s) {
  const double r = plate_separation(x, s);
  const double r2 = r * r;
  return -0.24 * C::hbar * C::c_light * s.alpha0 / (r2 * r2) * dielectric_factor(s);
}

double v_cp_thermal(double x, const SurfaceSetup& s) {
  if (!(s.temperature > 0.0))
    throw std::invalid_argument("v_cp_thermal: temperature must be > 0");
  const double r = plate_separation(x, s);
  return -C::k_boltzmann * s.temperature * s.alpha0 / (4.0 * r * r * r) * dielectric_factor(s);
}

double potential(double x, const SurfaceSetup& s, Potential choice) {
  return choice == Potential::ZeroTemperature ? v_cp_zero_temperature(x, s) : v_cp_thermal(x, s);
}

double thermal_wavelength(double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("thermal_wavelength: T must be > 0");
  return C::hbar * C::c_light / (C::k_boltzmann * temperature);
}

double regime_crossover_separation(double temperature) {
  return 0.96 * thermal_wavelength(temperature);
}

double detuning(const SurfaceSetup& s, Potential choice) {
  s.validate();
  const double near = mode_average(-0.5 * s.l, s, choice);
  const double far = mode_average(0.5 * s.l, s, choice);
  return (far - near) / (2.0 * C::hbar);
}

std::vector<DetuningRow> detuning_curve(const std::vector<double>& d_grid, const SurfaceSetup& s,
                                        const std::vector<double>& temperatures) {
  if (d_grid.empty()) throw std::invalid_argument("detuning_curve: empty distance grid");
  std::vector<DetuningRow> rows;
  rows.reserve(d_grid.size());
  for (double d : d_grid) {
    if (!(d > 0.0)) throw std::invalid_argument("detuning_curve: distances must be > 0");
    const SurfaceSetup at = s.with_distance(d);
    DetuningRow row;
    row.d = d;
    row.delta_zero_t = detuning(at, Potential::ZeroTemperature);
    for (double temp : temperatures)
      row.delta_thermal.push_back(detuning(at.with_temperature(temp), Potential::Thermal));
    rows.push_back(std::move(row));
  }
  return rows;
}

CalibrationResult calibrate_mode_width(const SurfaceSetup& s, double target_rate) {
  SurfaceSetup point = s;
  point.mode_model = ModeModel::PointSample;
  point.width = 0.0;
  point.validate();
  const double w_max = max_width(s) * (1.0 - 1e-9);
  auto rate_at = [&](double w) {
    return detuning(w > 0.0 ? s.with_gaussian_width(w) : point, Potential::ZeroTemperature);
  };
  const double lo_rate = rate_at(0.0);
  const double hi_rate = rate_at(w_max);

  CalibrationResult result;
  std::ostringstream note;
  if (target_rate < lo_rate) {
    result.width = 0.0;
    result.achieved_rate = lo_rate;
    note << "target " << target_rate << " 1/s is below the point-sample detuning " << lo_rate
         << " 1/s; Gaussian broadening only increases it";
  } else if (target_rate > hi_rate) {
    result.width = w_max;
    result.achieved_rate = hi_rate;
    note << "target " << target_rate << " 1/s exceeds the widest admissible mode (" << hi_rate
         << " 1/s)";
  } else {
    result.width = numerics::bisect_root([&](double w) { return rate_at(w) - target_rate; }, 0.0,
                                         w_max, 1e-15);
    result.achieved_rate = rate_at(result.width);
    result.reached = true;
    note << "calibrated";
  }
  result.note = note.str();
  return result;
}

}  // namespace rabi::casimir
