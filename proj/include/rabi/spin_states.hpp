#pragma once

// Collective-spin states of N particles in two modes, expanded in the
// Dicke basis |n, N-n>, n = occupation of mode a. With j = N/2:
//   Jz |n> = (n - j) |n>
//   J+ |n> = sqrt((n+1)(N-n)) |n+1>,   Jx = (J+ + J-)/2,  Jy = (J+ - J-)/2i

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace rabi {

template <typename Scalar>
class BasicDickeState {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Wraps an already normalized coefficient vector c_0..c_N.
  explicit BasicDickeState(Vector coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2)
      throw std::invalid_argument("DickeState: need at least one particle");
    const double norm2 = coeffs_.squaredNorm();
    if (!(std::abs(norm2 - 1.0) <= kNormTolerance))
      throw std::invalid_argument("DickeState: coefficients not normalized (|c|^2 = " +
                                  std::to_string(norm2) + ")");
  }

  int particles() const { return static_cast<int>(coeffs_.size()) - 1; }
  const Vector& coeffs() const { return coeffs_; }
  Scalar operator[](Eigen::Index n) const { return coeffs_[n]; }

  /// c_n == c_{N-n} for every n.
  bool is_symmetric(double tol = 1e-12) const {
    const Eigen::Index last = coeffs_.size() - 1;
    for (Eigen::Index n = 0; n <= last / 2; ++n)
      if (std::abs(coeffs_[n] - coeffs_[last - n]) > tol) return false;
    return true;
  }

  static constexpr double kNormTolerance = 1e-9;

 private:
  Vector coeffs_;
};

using DickeState = BasicDickeState<double>;
using EvolvedState = BasicDickeState<std::complex<double>>;

/// First moments and symmetrized second moments <(J_i J_j + J_j J_i)/2>
/// of (Jx, Jy, Jz).
struct SpinMoments {
  int particles = 0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();

  Eigen::Matrix3d covariance() const { return second - mean * mean.transpose(); }
  double spin_length() const { return 0.5 * particles; }
};

DickeState make_css(int particles);
DickeState make_gaussian_squeezed(int particles, double sigma);
DickeState make_twin_fock(int particles);

namespace detail {

// Ladder coefficient <n+1| J+ |n>.
inline double raise_amplitude(int particles, Eigen::Index n) {
  return std::sqrt(static_cast<double>(n + 1) * static_cast<double>(particles - n));
}

}  // namespace detail

/// Exact moments from the tridiagonal ladder action on the coefficients.
template <typename Scalar>
SpinMoments moments(const BasicDickeState<Scalar>& state) {
  using Complex = std::complex<double>;
  const int N = state.particles();
  const Eigen::Index dim = N + 1;
  const double j = 0.5 * N;

  Eigen::VectorXcd psi = state.coeffs().template cast<Complex>();
  Eigen::VectorXcd raised = Eigen::VectorXcd::Zero(dim);
  Eigen::VectorXcd lowered = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index n = 0; n + 1 < dim; ++n) {
    const double a = detail::raise_amplitude(N, n);
    raised[n + 1] = a * psi[n];
    lowered[n] = a * psi[n + 1];
  }

  Eigen::Matrix<Complex, Eigen::Dynamic, 3> applied(dim, 3);
  applied.col(0) = 0.5 * (raised + lowered);
  applied.col(1) = Complex(0.0, -0.5) * (raised - lowered);
  for (Eigen::Index n = 0; n < dim; ++n) applied(n, 2) = (static_cast<double>(n) - j) * psi[n];

  SpinMoments m;
  m.particles = N;
  for (int i = 0; i < 3; ++i) m.mean[i] = psi.dot(applied.col(i)).real();
  // <psi| J_i J_j |psi> = <J_i psi | J_j psi>; its real part is the symmetrized moment.
  m.second = (applied.adjoint() * applied).real();
  return m;
}

/// xi^2 = N <Jz^2> / <Jx>^2 from exact moments. Throws std::domain_error
/// when <Jx> vanishes (twin-Fock); use gaussian_squeezing_parameter there.
double squeezing_parameter(const SpinMoments& m);

/// Continuous-Gaussian approximation 4 sigma^2 exp(1/(4 sigma^2)) / N.
double gaussian_squeezing_parameter(int particles, double sigma);

/// Gaussian width whose exact-moment xi^2 equals target, for
/// 2/N < target < 1, searched on sigma in [1/2, sqrt(N)/2].
double width_for_squeezing(int particles, double target_xi2);

/// Input state with the requested squeezing: CSS when target_xi2 == 1,
/// otherwise a Gaussian with width_for_squeezing.
DickeState make_state_with_squeezing(int particles, double target_xi2);

/// Plain-text "n c_n" columns, one row per basis state.
void write_columns(std::ostream& os, const DickeState& state);

}  // namespace rabi
