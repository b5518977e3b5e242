#pragma once

// Closed-form models: a planar vehicle with a vectored thruster on
// SE(2) x S^1, a ball rolling on a rotating plate (R^2 x SO(3)) and a free
// rigid body on SO(3).

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lpvi/discrete.h"
#include "lpvi/lie.h"
#include "lpvi/ocp.h"
#include "lpvi/retraction.h"

namespace lpvi {

// ---------------------------------------------------------------------------
// Vehicle. Model state s = [gamma, gamma', gamma'', xi (3), xi' (3)]; xi_3 is
// the body rotation rate and (xi_1, xi_2) the body velocity. The group
// algebra puts rotation first, so the system and problem below take group
// coordinates and permute: model xi = (v2, v3, v1).

struct Se2VehicleParams {
  double m = 1.0;
  double J1 = 1.0;
  double J2 = 0.5;
  double p = 0.1;
  double rho1 = 1.0;
  double rho2 = 1.0;

  void validate() const;
};

double se2_ltilde(const Se2VehicleParams& P, const Eigen::VectorXd& s);
Eigen::VectorXd se2_ltilde_grad(const Se2VehicleParams& P, const Eigen::VectorXd& s);
Eigen::Vector2d se2_phi(const Se2VehicleParams& P, const Eigen::VectorXd& s);
Eigen::MatrixXd se2_phi_jac(const Se2VehicleParams& P, const Eigen::VectorXd& s);
// u1 and u2 from the actuated rows of the adapted form.
Eigen::Vector2d se2_controls(const Se2VehicleParams& P, const Eigen::VectorXd& s);

Eigen::MatrixXd se2_model_permutation();
Eigen::VectorXd se2_model_from_group(const Eigen::VectorXd& s);

// Residuals of the four reduced controlled equations (left minus right).
Eigen::Vector4d se2_controlled_equations(const Se2VehicleParams& P,
                                         const Eigen::VectorXd& s,
                                         const Eigen::Vector2d& u);

// Controlled system in group coordinates whose dynamics are the closed-form
// equations with rows [gamma; rotation; body x; body y], with the adapted
// basis. Without closed-form dynamics the reduction uses the
// Euler-Poincare operator of the reduced Lagrangian instead.
ControlledSystem se2_vehicle_system(const Se2VehicleParams& P, bool closed_form_dynamics);

// Reduced Lagrangian l(gamma, gamma', xi).
double se2_reduced_lagrangian(const Se2VehicleParams& P, double gamma_dot, const Vec3& xi);

SecondOrderProblem se2_vehicle_problem(const Se2VehicleParams& P, const BoundaryData& b,
                                       int N, double h);

// ---------------------------------------------------------------------------
// Ball on a rotating plate. State s = [x, y, x', y', x'', y'', w (3), w' (3)].
// The plate rate is Omega(t) = Omega + amplitude * sin(frequency * t).

struct BallPlateParams {
  double r = 0.1;
  double k2 = 0.004;
  double Omega = 1.0;
  double amplitude = 0.0;
  double frequency = 0.0;

  void validate() const;
  double omega(double t) const;
  double omega_d1(double t) const;
  double omega_d2(double t) const;
  bool time_dependent() const { return amplitude != 0.0; }
  // k^2 Omega(t) / (r^2 + k^2) and its time derivatives.
  double c(double t) const;
  double c_d1(double t) const;
  double c_d2(double t) const;
};

double ball_ltilde(const BallPlateParams& P, const Eigen::VectorXd& s, double t);
Eigen::VectorXd ball_ltilde_grad(const BallPlateParams& P, const Eigen::VectorXd& s,
                                 double t);
Eigen::Vector3d ball_phi(const BallPlateParams& P, const Eigen::VectorXd& s, double t);
Eigen::MatrixXd ball_phi_jac(const BallPlateParams& P, const Eigen::VectorXd& s, double t);

ControlledSystem ball_plate_system(const BallPlateParams& P);

SecondOrderProblem ball_plate_problem(const BallPlateParams& P, const BoundaryData& b,
                                      int N, double h);

// Continuous-limit data at one instant. x[j], y[j] hold the j-th time
// derivatives (j = 0..4). lambda follows the discrete sign convention
// (lambda = -lambda_d / h); lambda(2) holds the momentum conjugate to w3,
// that is minus the time derivative of the multiplier of w3'.
struct BallContinuousState {
  double x[5] = {0, 0, 0, 0, 0};
  double y[5] = {0, 0, 0, 0, 0};
  Vec3 w = Vec3::Zero();
  Vec3 w_dot = Vec3::Zero();
  Vec3 lambda = Vec3::Zero();
  Vec3 lambda_dot = Vec3::Zero();
};

// Eight residuals: two fourth-order equations in x and y, three multiplier
// equations, the two rolling constraints and w3' = 0. The constant-rate
// block ignores Omega' and Omega''; the rate law supplies them analytically.
Eigen::VectorXd ball_continuous_residual(const BallPlateParams& P,
                                         const BallContinuousState& st, double t,
                                         bool time_dependent,
                                         Trivialization triv = Trivialization::kRight);

// ---------------------------------------------------------------------------
// Free rigid body with diagonal inertia.

ReducedDiscreteLagrangian free_rigid_body_model(const Vec3& inertia, double h);

struct RigidBodyRun {
  Trivialization triv = Trivialization::kLeft;
  std::vector<GroupElement> g;  // N + 1 attitudes
  std::vector<Vec3> xi;         // N body rates
  std::vector<int> iterations;  // Newton iterations per step
  std::vector<double> residuals;  // final step residual
};

// Discrete Euler-Poincare march from attitude g0 and body rate w0. The first
// increment matches the continuous body momentum I w0. Throws
// SingularSystemError or Error if a step fails to converge.
RigidBodyRun march_free_rigid_body(const Vec3& inertia, const GroupElement& g0,
                                   const Vec3& w0, double h, int steps,
                                   const Retraction& r, Trivialization t,
                                   double tol = 1e-12);

double rigid_body_energy(const Vec3& inertia, const Vec3& xi);

// Spatial momentum J+ at every step, from the discrete momentum map under
// left multiplication. Requires a left-trivialized run.
std::vector<Vec3> rigid_body_momenta(const Vec3& inertia, const RigidBodyRun& run,
                                     double h, const Retraction& r);

}  // namespace lpvi
