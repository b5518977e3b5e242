#pragma once

// Finite-difference helpers shared by the residual assemblers and oracles.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace lpvi {

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Default relative step for central first derivatives: eps^(1/3).
double default_fd_step();

// Central-difference gradient; coordinate i uses rel_step * max(1, |x_i|).
Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x,
                            double rel_step = default_fd_step());

// Central-difference Jacobian of a vector function, same step policy.
Eigen::MatrixXd fd_jacobian_central(const VectorFn& f, const Eigen::VectorXd& x,
                                    double rel_step = default_fd_step());

// Four-point second differences with step eps^(1/4) * max(1, |x_i|).
Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& x);

// Five-point derivative of a scalar function of one variable at 0.
double fd_derivative5(const std::function<double(double)>& f, double step);

// Fornberg weights: w(j, d) is the weight of nodes[j] in the d-th derivative
// at x0, for d = 0..max_order.
Eigen::MatrixXd fornberg_weights(double x0, const std::vector<double>& nodes,
                                 int max_order);

}  // namespace lpvi
