#include "lpvi/solver.h"

#include <cmath>
#include <string>

#include "lpvi/errors.h"

namespace lpvi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void SolverConfig::validate() const {
  if (!(tol_residual > 0.0)) throw ConfigError("solver: tol must be > 0");
  if (max_iters < 1) throw ConfigError("solver: max_iters must be >= 1");
  if (!(fd_step > 0.0)) throw ConfigError("solver: fd_step must be > 0");
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw ConfigError("solver: backtracking factor must lie in (0, 1)");
  }
}

namespace {

void check_finite(const VectorXd& r, const char* what) {
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r(i))) {
      throw DomainError(std::string(what) + ": non-finite value at index " +
                            std::to_string(i),
                        static_cast<int>(i));
    }
  }
}

}  // namespace

MatrixXd fd_jacobian(const ResidualFn& f, const VectorXd& x, double fd_step) {
  MatrixXd jac;
  VectorXd xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = fd_step * std::max(1.0, std::abs(x(j)));
    // Divide by the representable spacing, not the nominal one.
    const double hi = x(j) + step;
    const double lo = x(j) - step;
    xp(j) = hi;
    const VectorXd fp = f(xp);
    xp(j) = lo;
    const VectorXd fm = f(xp);
    xp(j) = x(j);
    if (j == 0) jac.resize(fp.size(), x.size());
    jac.col(j) = (fp - fm) / (hi - lo);
  }
  for (Eigen::Index j = 0; j < jac.cols(); ++j) {
    for (Eigen::Index i = 0; i < jac.rows(); ++i) {
      if (!std::isfinite(jac(i, j))) {
        throw DomainError("fd_jacobian: non-finite entry (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")",
                          static_cast<int>(i));
      }
    }
  }
  return jac;
}

SolveResult solve(const ResidualFn& f, const VectorXd& x0, const SolverConfig& cfg,
                  const JacobianFn& jacobian) {
  cfg.validate();
  check_finite(x0, "solve: initial point");
  SolveResult out;
  VectorXd x = x0;
  VectorXd r = f(x);
  if (r.size() != x.size()) {
    throw SizeError("solve: residual has " + std::to_string(r.size()) +
                    " rows for " + std::to_string(x.size()) + " unknowns");
  }
  check_finite(r, "solve: residual");
  double norm_inf = r.cwiseAbs().maxCoeff();
  out.residual_history.push_back(norm_inf);
  VectorXd best = x;
  double best_norm = norm_inf;

  const bool use_model =
      cfg.jacobian_mode == JacobianMode::kModelSupplied && jacobian != nullptr;
  for (int it = 1; it <= cfg.max_iters && norm_inf > cfg.tol_residual; ++it) {
    const MatrixXd jac = use_model ? jacobian(x) : fd_jacobian(f, x, cfg.fd_step);
    Eigen::PartialPivLU<MatrixXd> lu(jac);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
      throw SingularSystemError("solve: singular Jacobian at iteration " +
                                    std::to_string(it) + " (condition estimate " +
                                    std::to_string(rcond > 0 ? 1.0 / rcond : INFINITY) +
                                    ")",
                                it);
    }
    const VectorXd dx = lu.solve(-r);
    // Armijo on phi = |r|^2 / 2; the Newton direction has slope -2 phi.
    const double phi = 0.5 * r.squaredNorm();
    double step = 1.0;
    bool accepted = false;
    VectorXd x_trial, r_trial;
    while (step >= cfg.min_step) {
      x_trial = x + step * dx;
      r_trial = f(x_trial);
      const bool finite = r_trial.allFinite();
      if (finite && 0.5 * r_trial.squaredNorm() <= (1.0 - 2.0 * cfg.armijo * step) * phi) {
        accepted = true;
        break;
      }
      step *= cfg.backtrack;
    }
    out.iterations = it;
    if (!accepted) {
      out.message = "line search failed at iteration " + std::to_string(it) +
                    " (step fell below " + std::to_string(cfg.min_step) + ")";
      break;
    }
    x = x_trial;
    r = r_trial;
    norm_inf = r.cwiseAbs().maxCoeff();
    out.residual_history.push_back(norm_inf);
    if (norm_inf < best_norm) {
      best_norm = norm_inf;
      best = x;
    }
  }
  out.converged = norm_inf <= cfg.tol_residual;
  if (out.converged) {
    out.x = x;
    out.message = "converged";
  } else {
    out.x = best;
    if (out.message.empty()) {
      out.message = "no convergence after " + std::to_string(out.iterations) +
                    " iterations (best residual " + std::to_string(best_norm) + ")";
    }
  }
  return out;
}

}  // namespace lpvi
