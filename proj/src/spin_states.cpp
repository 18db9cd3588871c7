#include "rabi/spin_states.hpp"

#include "rabi/diagnostics.hpp"
#include "rabi/numerics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rabi {
namespace {

DickeState normalized(Eigen::VectorXd c) {
  c /= c.norm();
  return DickeState(std::move(c));
}

}  // namespace

DickeState make_css(int particles) {
  if (particles < 1) throw std::invalid_argument("make_css: need N >= 1");
  const int N = particles;
  Eigen::VectorXd c(N + 1);
  // sqrt(binomial(N, n)) / 2^{N/2}, evaluated in log space.
  const double log_norm = std::lgamma(N + 1.0) - N * std::log(2.0);
  for (int n = 0; n <= N; ++n)
    c[n] = std::exp(0.5 * (log_norm - std::lgamma(n + 1.0) - std::lgamma(N - n + 1.0)));
  return normalized(std::move(c));
}

DickeState make_gaussian_squeezed(int particles, double sigma) {
  if (particles < 2) throw std::invalid_argument("make_gaussian_squeezed: need N >= 2");
  if (!(sigma > 0.0)) throw std::invalid_argument("make_gaussian_squeezed: sigma must be > 0");
  if (sigma > std::sqrt(static_cast<double>(particles))) {
    std::ostringstream msg;
    msg << "make_gaussian_squeezed: sigma = " << sigma << " exceeds sqrt(N) = "
        << std::sqrt(static_cast<double>(particles)) << " (anti-squeezed regime)";
    warn(msg.str());
  }
  const double center = 0.5 * particles;
  const double inv = 1.0 / (4.0 * sigma * sigma);
  // Offset by the smallest |n - N/2| so the central row(s) never underflow.
  const double x_min = particles % 2 == 0 ? 0.0 : 0.5;
  Eigen::VectorXd c(particles + 1);
  for (int n = 0; n <= particles; ++n) {
    const double x = n - center;
    c[n] = std::exp(-(x * x - x_min * x_min) * inv);
  }
  return normalized(std::move(c));
}

DickeState make_twin_fock(int particles) {
  if (particles < 2 || particles % 2 != 0)
    throw std::invalid_argument("make_twin_fock: N must be even and >= 2");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(particles + 1);
  c[particles / 2] = 1.0;
  return DickeState(std::move(c));
}

double squeezing_parameter(const SpinMoments& m) {
  const double jx = m.mean.x();
  if (std::abs(jx) <= 1e-12 * std::max(1.0, m.spin_length()))
    throw std::domain_error("squeezing_parameter: <Jx> = 0, xi^2 undefined");
  return m.particles * m.second(2, 2) / (jx * jx);
}

double gaussian_squeezing_parameter(int particles, double sigma) {
  if (particles < 1 || !(sigma > 0.0))
    throw std::invalid_argument("gaussian_squeezing_parameter: need N >= 1 and sigma > 0");
  const double s2 = sigma * sigma;
  return 4.0 * s2 * std::exp(1.0 / (4.0 * s2)) / particles;
}

double width_for_squeezing(int particles, double target_xi2) {
  if (particles < 2) throw std::invalid_argument("width_for_squeezing: need N >= 2");
  if (!(target_xi2 > 0.0 && target_xi2 < 1.0))
    throw std::invalid_argument("width_for_squeezing: target xi^2 must lie in (0, 1)");
  auto excess = [&](double sigma) {
    return squeezing_parameter(moments(make_gaussian_squeezed(particles, sigma))) - target_xi2;
  };
  const double lo = 0.5;
  const double hi = 0.5 * std::sqrt(static_cast<double>(particles));
  if (excess(lo) > 0.0)
    throw NumericalError("width_for_squeezing: xi^2 = " + std::to_string(target_xi2) +
                         " is below the sigma = 1/2 value for N = " + std::to_string(particles));
  return numerics::bisect_root(excess, lo, hi, 1e-12);
}

DickeState make_state_with_squeezing(int particles, double target_xi2) {
  if (target_xi2 == 1.0) return make_css(particles);
  return make_gaussian_squeezed(particles, width_for_squeezing(particles, target_xi2));
}

void write_columns(std::ostream& os, const DickeState& state) {
  os << "n c_n\n" << std::setprecision(17);
  for (Eigen::Index n = 0; n < state.coeffs().size(); ++n) os << n << ' ' << state[n] << '\n';
}

}  // namespace rabi
