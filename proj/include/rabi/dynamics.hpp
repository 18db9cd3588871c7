#pragma once

// Two-mode Rabi dynamics under H/hbar = -E_J Jx + delta Jz (+ E_C Jz^2).
// All energies are carried as angular rates (energy / hbar, in 1/s) and
// time in seconds, so Omega = omega t is dimensionless.

#include "rabi/krylov.hpp"
#include "rabi/spin_states.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace rabi {

class InterferometerParams {
 public:
  /// Tunneling rate E_J/hbar (> 0) and detuning rate delta/hbar.
  InterferometerParams(double ej_rate, double delta_rate);

  double ej_rate() const { return ej_rate_; }
  double delta_rate() const { return delta_rate_; }
  /// Detuned Rabi frequency sqrt(E_J^2 + delta^2)/hbar.
  double omega() const { return omega_; }
  double cos_alpha() const { return ej_rate_ / omega_; }
  double sin_alpha() const { return delta_rate_ / omega_; }
  double tan_alpha() const { return delta_rate_ / ej_rate_; }
  double alpha() const { return std::atan2(delta_rate_, ej_rate_); }
  double rabi_period() const;
  /// Omega = omega t.
  double phase(double t) const { return omega_ * t; }

  InterferometerParams with_delta(double delta_rate) const {
    return InterferometerParams(ej_rate_, delta_rate);
  }

 private:
  double ej_rate_;
  double delta_rate_;
  double omega_;
};

/// Heisenberg-picture Jz(t) = u Jx + v Jy + w Jz.
struct RotationCoefficients {
  double u = 0.0;
  double v = 0.0;
  double w = 1.0;

  Eigen::Vector3d row() const { return {u, v, w}; }
};

RotationCoefficients rotation_coefficients(const InterferometerParams& p, double t);

/// Partial derivatives of (u, v, w) with respect to delta/hbar at fixed
/// E_J and t, in seconds.
RotationCoefficients rotation_coefficients_ddelta(const InterferometerParams& p, double t);

double mean_jz(const SpinMoments& m, const InterferometerParams& p, double t);
double var_jz(const SpinMoments& m, const InterferometerParams& p, double t);

/// d<Jz(t)>/d(delta/hbar) from the closed-form coefficient derivatives.
double mean_jz_ddelta(const SpinMoments& m, const InterferometerParams& p, double t);

/// <Jz(t)> for the coherent spin state along +x:
/// (N/2) sin(alpha) cos(alpha) (cos Omega - 1).
double css_mean_jz(int particles, const InterferometerParams& p, double t);

/// Relative single-time sensitivity of the coherent state,
///   sqrt(1 - u^2) / (sqrt(mN) sin a cos a |cos 2a (cos W - 1) - sin^2 a W sin W|).
/// Identical to the error-propagation formula evaluated on CSS moments.
double css_relative_sensitivity(int particles, const InterferometerParams& p, double t,
                                int repetitions);

/// Leading small-alpha form of the same quantity,
///   1 / (sqrt(mN) tan a |cos W - 1 - (sin^2 a / cos a) W sin W|).
double css_relative_sensitivity_leading_order(int particles, const InterferometerParams& p,
                                              double t, int repetitions);

struct EvolveOptions {
  int max_particles = 5000;
  KrylovOptions krylov{};
};

/// Hamiltonian -E_J Jx + delta Jz + E_C Jz^2 in the Dicke basis.
TridiagonalOperator dicke_hamiltonian(int particles, const InterferometerParams& p,
                                      double ec_rate);

/// Exact unitary evolution of the coefficient vector.
template <typename Scalar>
EvolvedState evolve_exact(const BasicDickeState<Scalar>& state, const InterferometerParams& p,
                          double t, double ec_rate = 0.0, const EvolveOptions& options = {});

/// First-order (in E_C) correction to <Jz(t)> from the E_C Jz^2 term,
///   -2 E_C int_0^t r(s)^T S (r(s) x r(t)) ds,
/// with r(s) the rotation row at time s and S the symmetrized second
/// moments of the input. Requires gamma = N E_C / E_J <= 0.5 and warns
/// above 0.2 or when the correction exceeds 10% of the signal.
double dyson_correction(const SpinMoments& m, const InterferometerParams& p, double t,
                        double ec_rate);

/// Same integral without the validity checks; used inside fitting loops.
double dyson_correction_unchecked(const SpinMoments& m, const InterferometerParams& p, double t,
                                  double ec_rate);

/// Interaction strength E_C / hbar that yields gamma = N E_C / E_J.
inline double interaction_rate(double gamma, int particles, double ej_rate) {
  return gamma * ej_rate / particles;
}

}  // namespace rabi
