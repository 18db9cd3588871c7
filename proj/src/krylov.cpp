#include "rabi/krylov.hpp"

#include "rabi/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <vector>

namespace rabi {

double TridiagonalOperator::norm_bound() const {
  double bound = 0.0;
  const Eigen::Index n = size();
  for (Eigen::Index k = 0; k < n; ++k) {
    double row = std::abs(diagonal[k]);
    if (k > 0) row += std::abs(off_diagonal[k - 1]);
    if (k + 1 < n) row += std::abs(off_diagonal[k]);
    bound = std::max(bound, row);
  }
  return bound;
}

namespace {

struct LanczosBasis {
  Eigen::MatrixXcd vectors;  // n x m, orthonormal columns
  Eigen::VectorXd alpha;     // m
  Eigen::VectorXd beta;      // m (beta[m-1] is the residual norm)
  int dim = 0;
  bool invariant = false;    // happy breakdown: subspace is H-invariant
};

LanczosBasis lanczos(const TridiagonalOperator& h, const Eigen::VectorXcd& start, int max_dim) {
  const Eigen::Index n = h.size();
  const int m = static_cast<int>(std::min<Eigen::Index>(max_dim, n));
  LanczosBasis basis;
  basis.vectors.resize(n, m);
  basis.alpha.setZero(m);
  basis.beta.setZero(m);

  const double start_norm = start.norm();
  basis.vectors.col(0) = start / start_norm;
  const double breakdown = 1e-13 * std::max(1.0, h.norm_bound());

  for (int j = 0; j < m; ++j) {
    Eigen::VectorXcd w = h.apply(basis.vectors.col(j));
    basis.alpha[j] = basis.vectors.col(j).dot(w).real();
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXcd overlaps = basis.vectors.leftCols(j + 1).adjoint() * w;
      w -= basis.vectors.leftCols(j + 1) * overlaps;
    }
    basis.beta[j] = w.norm();
    basis.dim = j + 1;
    if (basis.beta[j] <= breakdown) {
      basis.invariant = true;
      break;
    }
    if (j + 1 < m) basis.vectors.col(j + 1) = w / basis.beta[j];
  }
  if (basis.dim == n) basis.invariant = true;
  return basis;
}

}  // namespace

Eigen::VectorXcd krylov_propagate(const TridiagonalOperator& h, Eigen::VectorXcd psi, double t,
                                  const KrylovOptions& options, KrylovReport* report) {
  if (t < 0.0) throw std::invalid_argument("krylov_propagate: t must be >= 0");
  KrylovReport local;
  double remaining = t;
  const double budget_rate = options.tolerance / std::max(t, 1e-300);
  const double min_step = 1e-14 * std::max(t, 1.0 / std::max(h.norm_bound(), 1e-300));

  while (remaining > 0.0) {
    if (local.steps >= options.max_steps)
      throw NumericalError("krylov_propagate: exceeded step limit");
    const double psi_norm = psi.norm();
    const LanczosBasis basis = lanczos(h, psi, options.subspace_dim);
    const int m = basis.dim;

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      tri(k, k) = basis.alpha[k];
      if (k + 1 < m) tri(k, k + 1) = tri(k + 1, k) = basis.beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const Eigen::MatrixXd& q = eig.eigenvectors();
    const Eigen::VectorXd q0 = q.row(0).transpose();

    auto small_solution = [&](double tau) {
      Eigen::VectorXcd phase(m);
      for (int k = 0; k < m; ++k)
        phase[k] = q0[k] * std::exp(std::complex<double>(0.0, -lambda[k] * tau));
      return Eigen::VectorXcd(q.cast<std::complex<double>>() * phase);
    };
    auto step_error = [&](double tau) {
      if (basis.invariant) return 0.0;
      return psi_norm * basis.beta[m - 1] * std::abs(small_solution(tau)[m - 1]);
    };

    // The residual estimate is only trustworthy inside the Krylov
    // convergence region, tau * ||H|| of order m.
    double tau = basis.invariant ? remaining : std::min(remaining, 0.5 * m / h.norm_bound());
    // Below this the estimate is dominated by roundoff in the small solve.
    const double floor = basis.invariant ? 0.0
                                         : m * std::numeric_limits<double>::epsilon() *
                                               basis.beta[m - 1] * psi_norm;
    double err = step_error(tau);
    while (err > std::max(budget_rate * tau, floor)) {
      tau *= 0.5;
      if (tau < min_step) {
        std::ostringstream msg;
        msg << "krylov_propagate: step size collapsed at t = " << (t - remaining)
            << " (achieved local error " << err << ", requested " << options.tolerance << ")";
        throw NumericalError(msg.str());
      }
      err = step_error(tau);
    }

    psi = psi_norm * (basis.vectors.leftCols(m) * small_solution(tau));
    remaining -= tau;
    if (remaining < 1e-15 * t) remaining = 0.0;
    local.error_estimate += err;
    ++local.steps;
  }
  if (report) *report = local;
  return psi;
}

}  // namespace rabi
