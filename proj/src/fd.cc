#include "lpvi/fd.h"

#include <cmath>
#include <limits>

namespace lpvi {

double default_fd_step() {
  return std::cbrt(std::numeric_limits<double>::epsilon());
}

Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x,
                            double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = rel_step * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    const double fp = f(xp);
    xp(i) = x(i) - step;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd fd_jacobian_central(const VectorFn& f, const Eigen::VectorXd& x,
                                    double rel_step) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = rel_step * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    const Eigen::VectorXd fp = f(xp);
    xp(i) = x(i) - step;
    const Eigen::VectorXd fm = f(xp);
    xp(i) = x(i);
    if (i == 0) jac.resize(fp.size(), x.size());
    jac.col(i) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

double fd_derivative5(const std::function<double(double)>& f, double step) {
  return (-f(2.0 * step) + 8.0 * f(step) - 8.0 * f(-step) + f(-2.0 * step)) /
         (12.0 * step);
}

Eigen::MatrixXd fornberg_weights(double x0, const std::vector<double>& nodes,
                                 int max_order) {
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, max_order + 1);
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        }
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      }
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c;
}

Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& x) {
  const double rel = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd xp = x;
  auto step = [&](Eigen::Index i) { return rel * std::max(1.0, std::abs(x(i))); };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double si = step(i), sj = step(j);
      auto at = [&](double a, double b) {
        xp = x;
        xp(i) += a;
        xp(j) += b;
        return f(xp);
      };
      const double v = (at(si, sj) - at(si, -sj) - at(-si, sj) + at(-si, -sj)) /
                       (4.0 * si * sj);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}


}  // namespace lpvi
