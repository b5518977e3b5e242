#include "lpvi/solver.h"

#include <cmath>

#include <gtest/gtest.h>

#include "lpvi/errors.h"

namespace lpvi {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(Solve, LinearSystemInOneStep) {
  const VectorXd c = (VectorXd(3) << 1.5, -2.0, 4.0).finished();
  const ResidualFn f = [&](const VectorXd& x) -> VectorXd { return x - c; };
  const SolveResult res = solve(f, VectorXd::Zero(3), SolverConfig{});
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_LT((res.x - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Solve, ScalarQuadraticConvergence) {
  const ResidualFn f = [](const VectorXd& x) -> VectorXd {
    return VectorXd::Constant(1, x(0) * x(0) - 4.0);
  };
  SolverConfig cfg;
  cfg.tol_residual = 1e-14;
  const SolveResult res = solve(f, VectorXd::Constant(1, 3.0), cfg);
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.x(0), 2.0, 1e-14);
  // Errors |x_n - 2| from residuals |x^2 - 4| = |x - 2||x + 2|.
  std::vector<double> err;
  for (double r : res.residual_history) err.push_back(r / 4.0);
  for (size_t i = 1; i + 1 < err.size(); ++i) {
    if (err[i] < 1e-7 || err[i + 1] == 0.0) break;
    EXPECT_LT(err[i + 1] / (err[i] * err[i]), 10.0);
  }
}

TEST(Solve, DeterministicHistories) {
  const ResidualFn f = [](const VectorXd& x) -> VectorXd {
    VectorXd r(2);
    r << std::sin(x(0)) + x(1) * x(1) - 0.3, x(0) * x(1) - 0.1 + std::exp(x(1)) - 1.0;
    return r;
  };
  const VectorXd x0 = (VectorXd(2) << 0.5, 0.5).finished();
  const SolveResult a = solve(f, x0, SolverConfig{});
  const SolveResult b = solve(f, x0, SolverConfig{});
  ASSERT_TRUE(a.converged);
  EXPECT_EQ(a.residual_history, b.residual_history);
  EXPECT_EQ(a.x, b.x);
  for (size_t i = 1; i < a.residual_history.size(); ++i) {
    EXPECT_LE(a.residual_history[i], a.residual_history[i - 1] * 1.0000001 + 1e-300);
  }
}

TEST(Solve, SingularJacobianNamesIteration) {
  const ResidualFn f = [](const VectorXd& x) -> VectorXd {
    VectorXd r(2);
    r << x(0) + x(1) - 1.0, 2.0 * (x(0) + x(1)) - 2.0 + 1e-3;
    return r;
  };
  try {
    solve(f, VectorXd::Zero(2), SolverConfig{});
    FAIL();
  } catch (const SingularSystemError& e) {
    EXPECT_EQ(e.iteration(), 1);
  }
}

TEST(Solve, NonFiniteResidualNamesIndex) {
  const ResidualFn f = [](const VectorXd& x) -> VectorXd {
    VectorXd r = x;
    r(1) = std::log(-1.0 - x(1) * x(1));
    return r;
  };
  try {
    solve(f, VectorXd::Zero(3), SolverConfig{});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.index(), 1);
  }
}

TEST(Solve, NoConvergenceReportsBestIterate) {
  // x^2 + 1 has no real root.
  const ResidualFn f = [](const VectorXd& x) -> VectorXd {
    return VectorXd::Constant(1, x(0) * x(0) + 1.0);
  };
  SolverConfig cfg;
  cfg.max_iters = 5;
  const SolveResult res = solve(f, VectorXd::Constant(1, 0.7), cfg);
  EXPECT_FALSE(res.converged);
  EXPECT_FALSE(res.message.empty());
  double best = res.residual_history[0];
  for (double r : res.residual_history) best = std::min(best, r);
  EXPECT_DOUBLE_EQ(f(res.x)(0), best);
}

TEST(FdJacobian, LinearAndSymmetric) {
  MatrixXd a(3, 3);
  a << 2, -1, 0.5, 0.3, 4, 1, -2, 0, 1;
  const VectorXd b = (VectorXd(3) << 1, 2, 3).finished();
  const ResidualFn lin = [&](const VectorXd& x) -> VectorXd { return a * x - b; };
  const double step = SolverConfig{}.fd_step;
  const ResidualFn hom = [&](const VectorXd& x) -> VectorXd { return a * x; };
  EXPECT_LT((fd_jacobian(hom, VectorXd::Zero(3), step) - a).cwiseAbs().maxCoeff(), 1e-10);
  // Away from the origin the bound is set by rounding in f, about eps |f| / step.
  const VectorXd x = (VectorXd(3) << 0.1, -5, 30).finished();
  EXPECT_LT((fd_jacobian(lin, x, step) - a).cwiseAbs().maxCoeff(), 1e-6);
  // Gradient of S(x) = sum cos(x_i x_{i+1}) + x^4.
  const ResidualFn grad = [](const VectorXd& x) -> VectorXd {
    VectorXd g = 4.0 * x.array().cube();
    for (int i = 0; i + 1 < x.size(); ++i) {
      const double s = -std::sin(x(i) * x(i + 1));
      g(i) += s * x(i + 1);
      g(i + 1) += s * x(i);
    }
    return g;
  };
  const MatrixXd j = fd_jacobian(grad, x, SolverConfig{}.fd_step);
  EXPECT_LE((j - j.transpose()).cwiseAbs().maxCoeff() / j.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Config, Validation) {
  SolverConfig cfg;
  cfg.tol_residual = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SolverConfig{};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace lpvi
