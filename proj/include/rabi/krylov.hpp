#pragma once

#include <Eigen/Dense>

namespace rabi {

/// Real symmetric tridiagonal operator; diagonal d_0..d_{n-1} and
/// off-diagonal e_0..e_{n-2} coupling rows k and k+1.
struct TridiagonalOperator {
  Eigen::VectorXd diagonal;
  Eigen::VectorXd off_diagonal;

  Eigen::Index size() const { return diagonal.size(); }

  template <typename Derived>
  Eigen::VectorXcd apply(const Eigen::MatrixBase<Derived>& x) const {
    const Eigen::Index n = size();
    Eigen::VectorXcd y = diagonal.cwiseProduct(x);
    if (n > 1) {
      y.head(n - 1) += off_diagonal.cwiseProduct(x.tail(n - 1));
      y.tail(n - 1) += off_diagonal.cwiseProduct(x.head(n - 1));
    }
    return y;
  }

  /// Gershgorin bound on the spectral radius.
  double norm_bound() const;
};

struct KrylovOptions {
  int subspace_dim = 40;
  /// Local error budget per unit time, in state norm.
  double tolerance = 1e-12;
  int max_steps = 1000000;
};

struct KrylovReport {
  int steps = 0;
  double error_estimate = 0.0;
};

/// psi(t) = exp(-i H t) psi(0) by restarted Lanczos time stepping. Each step
/// picks the largest sub-step whose a-posteriori error estimate
/// beta_m |[exp(-i tau T_m) e_1]_m| fits the per-unit-time budget. Throws
/// NumericalError when the step size collapses.
Eigen::VectorXcd krylov_propagate(const TridiagonalOperator& h, Eigen::VectorXcd psi, double t,
                                  const KrylovOptions& options = {},
                                  KrylovReport* report = nullptr);

}  // namespace rabi
