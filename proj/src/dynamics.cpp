#include "rabi/dynamics.hpp"

#include "rabi/diagnostics.hpp"
#include "rabi/numerics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace rabi {

InterferometerParams::InterferometerParams(double ej_rate, double delta_rate)
    : ej_rate_(ej_rate), delta_rate_(delta_rate), omega_(std::hypot(ej_rate, delta_rate)) {
  if (!(ej_rate > 0.0) || !std::isfinite(ej_rate))
    throw std::invalid_argument("InterferometerParams: E_J/hbar must be positive and finite");
  if (!std::isfinite(delta_rate))
    throw std::invalid_argument("InterferometerParams: delta/hbar must be finite");
}

double InterferometerParams::rabi_period() const { return 2.0 * std::numbers::pi / omega_; }

RotationCoefficients rotation_coefficients(const InterferometerParams& p, double t) {
  if (t < 0.0) throw std::invalid_argument("rotation_coefficients: t must be >= 0");
  const double s = p.sin_alpha(), c = p.cos_alpha();
  const double phase = p.phase(t);
  const double cos_phase = std::cos(phase);
  return {s * c * (cos_phase - 1.0), -c * std::sin(phase), c * c * cos_phase + s * s};
}

RotationCoefficients rotation_coefficients_ddelta(const InterferometerParams& p, double t) {
  const double s = p.sin_alpha(), c = p.cos_alpha(), omega = p.omega();
  const double phase = p.phase(t);
  const double cos_phase = std::cos(phase), sin_phase = std::sin(phase);
  // ds/d(delta) = c^2/omega, dc/d(delta) = -s c/omega, dOmega/d(delta) = Omega s/omega.
  const double dphase = phase * s / omega;
  RotationCoefficients d;
  d.u = c * (c * c - s * s) / omega * (cos_phase - 1.0) - s * c * sin_phase * dphase;
  d.v = s * c / omega * sin_phase - c * cos_phase * dphase;
  d.w = 2.0 * s * c * c / omega * (1.0 - cos_phase) - c * c * sin_phase * dphase;
  return d;
}

double mean_jz(const SpinMoments& m, const InterferometerParams& p, double t) {
  return rotation_coefficients(p, t).row().dot(m.mean);
}

double var_jz(const SpinMoments& m, const InterferometerParams& p, double t) {
  const Eigen::Vector3d r = rotation_coefficients(p, t).row();
  const double first = r.dot(m.mean);
  return r.dot(m.second * r) - first * first;
}

double mean_jz_ddelta(const SpinMoments& m, const InterferometerParams& p, double t) {
  return rotation_coefficients_ddelta(p, t).row().dot(m.mean);
}

double css_mean_jz(int particles, const InterferometerParams& p, double t) {
  return 0.5 * particles * p.sin_alpha() * p.cos_alpha() * (std::cos(p.phase(t)) - 1.0);
}

double css_relative_sensitivity(int particles, const InterferometerParams& p, double t,
                                int repetitions) {
  const double s = p.sin_alpha(), c = p.cos_alpha();
  const double phase = p.phase(t);
  const double u = s * c * (std::cos(phase) - 1.0);
  const double bracket =
      (c * c - s * s) * (std::cos(phase) - 1.0) - s * s * phase * std::sin(phase);
  return std::sqrt(1.0 - u * u) /
         (std::sqrt(static_cast<double>(repetitions) * particles) * s * c * std::abs(bracket));
}

double css_relative_sensitivity_leading_order(int particles, const InterferometerParams& p,
                                              double t, int repetitions) {
  const double s = p.sin_alpha(), c = p.cos_alpha();
  const double phase = p.phase(t);
  const double bracket = std::cos(phase) - 1.0 - s * s / c * phase * std::sin(phase);
  return 1.0 / (std::sqrt(static_cast<double>(repetitions) * particles) * p.tan_alpha() *
                std::abs(bracket));
}

TridiagonalOperator dicke_hamiltonian(int particles, const InterferometerParams& p,
                                      double ec_rate) {
  const Eigen::Index dim = particles + 1;
  const double j = 0.5 * particles;
  TridiagonalOperator h;
  h.diagonal.resize(dim);
  h.off_diagonal.resize(dim - 1);
  for (Eigen::Index n = 0; n < dim; ++n) {
    const double jz = static_cast<double>(n) - j;
    h.diagonal[n] = p.delta_rate() * jz + ec_rate * jz * jz;
  }
  for (Eigen::Index n = 0; n + 1 < dim; ++n)
    h.off_diagonal[n] = -0.5 * p.ej_rate() * detail::raise_amplitude(particles, n);
  return h;
}

template <typename Scalar>
EvolvedState evolve_exact(const BasicDickeState<Scalar>& state, const InterferometerParams& p,
                          double t, double ec_rate, const EvolveOptions& options) {
  if (t < 0.0) throw std::invalid_argument("evolve_exact: t must be >= 0");
  if (state.particles() > options.max_particles)
    throw std::invalid_argument("evolve_exact: N = " + std::to_string(state.particles()) +
                                " exceeds the configured cap " +
                                std::to_string(options.max_particles));
  const TridiagonalOperator h = dicke_hamiltonian(state.particles(), p, ec_rate);
  Eigen::VectorXcd psi = state.coeffs().template cast<std::complex<double>>();
  psi = krylov_propagate(h, std::move(psi), t, options.krylov);
  // Renormalize away roundoff drift accumulated over many steps.
  const double drift = std::abs(psi.squaredNorm() - 1.0);
  if (drift > 1e-10) {
    std::ostringstream msg;
    msg << "evolve_exact: norm drift " << drift << " exceeds 1e-10";
    throw NumericalError(msg.str());
  }
  psi /= psi.norm();
  return EvolvedState(std::move(psi));
}

template EvolvedState evolve_exact(const DickeState&, const InterferometerParams&, double, double,
                                   const EvolveOptions&);
template EvolvedState evolve_exact(const EvolvedState&, const InterferometerParams&, double,
                                   double, const EvolveOptions&);

double dyson_correction_unchecked(const SpinMoments& m, const InterferometerParams& p, double t,
                                  double ec_rate) {
  if (ec_rate == 0.0 || t == 0.0) return 0.0;
  const Eigen::Vector3d target = rotation_coefficients(p, t).row();
  auto integrand = [&](double s) {
    const Eigen::Vector3d r = rotation_coefficients(p, s).row();
    return r.dot(m.second * r.cross(target));
  };
  // Scale-aware absolute floor: the integrand is O(N^2) and may vanish
  // identically for symmetric inputs at delta = 0.
  const double scale = t * m.spin_length() * m.spin_length();
  const auto integral = numerics::integrate_adaptive(integrand, 0.0, t, 1e-10, 1e-14 * scale);
  return -2.0 * ec_rate * integral.value;
}

double dyson_correction(const SpinMoments& m, const InterferometerParams& p, double t,
                        double ec_rate) {
  if (t < 0.0) throw std::invalid_argument("dyson_correction: t must be >= 0");
  const double gamma = m.particles * ec_rate / p.ej_rate();
  if (std::abs(gamma) > 0.5)
    throw std::invalid_argument("dyson_correction: gamma = N E_C / E_J = " +
                                std::to_string(gamma) + " exceeds 0.5");
  if (std::abs(gamma) > 0.2)
    warn("dyson_correction: gamma = " + std::to_string(gamma) +
         " > 0.2, first-order expansion may be inaccurate");
  const double correction = dyson_correction_unchecked(m, p, t, ec_rate);
  const double signal = mean_jz(m, p, t);
  if (std::abs(correction) > 0.1 * std::abs(signal) && correction != 0.0) {
    std::ostringstream msg;
    msg << "dyson_correction: |correction| = " << std::abs(correction)
        << " exceeds 10% of the uncorrected signal " << std::abs(signal) << " at t = " << t;
    warn(msg.str());
  }
  return correction;
}

}  // namespace rabi
