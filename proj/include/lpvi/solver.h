#pragma once

// Damped Newton for square nonlinear systems with dense LU.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lpvi {

enum class JacobianMode { kFiniteDifference, kModelSupplied };

struct SolverConfig {
  double tol_residual = 1e-10;  // infinity norm
  int max_iters = 200;
  // Relative central-difference step; column j uses fd_step * max(1, |x_j|).
  double fd_step = std::sqrt(std::numeric_limits<double>::epsilon());
  double backtrack = 0.5;
  double min_step = 1.0 / 1048576.0;  // 2^-20
  double armijo = 1e-4;
  JacobianMode jacobian_mode = JacobianMode::kFiniteDifference;

  void validate() const;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct SolveResult {
  Eigen::VectorXd x;  // converged point, or best iterate otherwise
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;  // infinity norms, one per iterate
  std::string message;
};

// Central-difference Jacobian. Throws DomainError on non-finite entries.
Eigen::MatrixXd fd_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                            double fd_step);

// Throws SingularSystemError when the LU condition estimate exceeds 1e14 and
// DomainError when the residual at an accepted point is not finite. A null
// jacobian, or kFiniteDifference mode, uses fd_jacobian.
SolveResult solve(const ResidualFn& f, const Eigen::VectorXd& x0,
                  const SolverConfig& cfg, const JacobianFn& jacobian = nullptr);

}  // namespace lpvi
