#include "lpvi/models.h"

#include <cmath>
#include <string>

#include "lpvi/errors.h"
#include "lpvi/solver.h"

namespace lpvi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("model parameter ") + name + " must be > 0");
  }
}

void require_state(const VectorXd& s, int size, const char* where) {
  if (s.size() != size) {
    throw SizeError(std::string(where) + ": state must have size " + std::to_string(size));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Vehicle.

void Se2VehicleParams::validate() const {
  require_positive(m, "m");
  require_positive(J1, "J1");
  require_positive(J2, "J2");
  require_positive(p, "p");
  require_positive(rho1, "rho1");
  require_positive(rho2, "rho2");
}

namespace {

// P = m xi1', Q = m xi2' + (K - m) xi1 xi3 + J2 xi1 gamma' and their
// gradients over s.
struct Se2Terms {
  double c, sn, P, Q;
  VectorXd dP, dQ;
};

Se2Terms se2_terms(const Se2VehicleParams& M, const VectorXd& s) {
  require_state(s, 9, "se2 vehicle");
  const double k = M.J1 + M.J2;
  Se2Terms t;
  t.c = std::cos(s(0));
  t.sn = std::sin(s(0));
  t.P = M.m * s(6);
  t.Q = M.m * s(7) + (k - M.m) * s(3) * s(5) + M.J2 * s(3) * s(1);
  t.dP = VectorXd::Zero(9);
  t.dP(6) = M.m;
  t.dQ = VectorXd::Zero(9);
  t.dQ(7) = M.m;
  t.dQ(3) = (k - M.m) * s(5) + M.J2 * s(1);
  t.dQ(5) = (k - M.m) * s(3);
  t.dQ(1) = M.J2 * s(3);
  return t;
}

}  // namespace

Eigen::Vector2d se2_controls(const Se2VehicleParams& M, const VectorXd& s) {
  const Se2Terms t = se2_terms(M, s);
  return {t.c * t.P + t.sn * t.Q, M.J2 * (s(8) + s(2))};
}

double se2_ltilde(const Se2VehicleParams& M, const VectorXd& s) {
  const Eigen::Vector2d u = se2_controls(M, s);
  return M.rho2 * u(1) * u(1) + M.rho1 * u(0) * u(0);
}

VectorXd se2_ltilde_grad(const Se2VehicleParams& M, const VectorXd& s) {
  const Se2Terms t = se2_terms(M, s);
  const double u1 = t.c * t.P + t.sn * t.Q;
  VectorXd du = t.c * t.dP + t.sn * t.dQ;
  du(0) = t.c * t.Q - t.sn * t.P;
  VectorXd g = 2.0 * M.rho1 * u1 * du;
  const double w = 2.0 * M.rho2 * M.J2 * M.J2 * (s(8) + s(2));
  g(2) += w;
  g(8) += w;
  return g;
}

Eigen::Vector2d se2_phi(const Se2VehicleParams& M, const VectorXd& s) {
  const Se2Terms t = se2_terms(M, s);
  const double k = M.J1 + M.J2;
  const double phi2 = (k / M.p) * s(8) + k * s(3) * s(5) + (M.J2 / M.p) * s(2) +
                      M.J2 * s(3) * s(1) + M.m * s(7) - M.m * s(3) * s(5) -
                      (M.m / M.p) * (s(3) * s(4) + s(4) * s(5));
  return {t.c * t.Q - t.sn * t.P, phi2};
}

MatrixXd se2_phi_jac(const Se2VehicleParams& M, const VectorXd& s) {
  const Se2Terms t = se2_terms(M, s);
  const double k = M.J1 + M.J2;
  MatrixXd j = MatrixXd::Zero(2, 9);
  j.row(0) = (t.c * t.dQ - t.sn * t.dP).transpose();
  j(0, 0) = -(t.c * t.P + t.sn * t.Q);
  j(1, 1) = M.J2 * s(3);
  j(1, 2) = M.J2 / M.p;
  j(1, 3) = k * s(5) + M.J2 * s(1) - M.m * s(5) - (M.m / M.p) * s(4);
  j(1, 4) = -(M.m / M.p) * (s(3) + s(5));
  j(1, 5) = k * s(3) - M.m * s(3) - (M.m / M.p) * s(4);
  j(1, 7) = M.m;
  j(1, 8) = k / M.p;
  return j;
}

Eigen::Vector4d se2_controlled_equations(const Se2VehicleParams& M, const VectorXd& s,
                                         const Eigen::Vector2d& u) {
  require_state(s, 9, "se2 vehicle");
  const double k = M.J1 + M.J2;
  const double c = std::cos(s(0)), sn = std::sin(s(0));
  Eigen::Vector4d r;
  r(0) = M.m * s(6) - u(0) * c;
  r(1) = M.m * s(7) + k * s(3) * s(5) + M.J2 * s(3) * s(1) - M.m * s(3) * s(5) - u(0) * sn;
  r(2) = k * s(8) + M.J2 * s(2) - M.m * s(4) * (s(3) + s(5)) + u(0) * M.p * sn;
  r(3) = M.J2 * (s(8) + s(2)) - u(1);
  return r;
}

double se2_reduced_lagrangian(const Se2VehicleParams& M, double gamma_dot, const Vec3& xi) {
  const double k = M.J1 + M.J2;
  return 0.5 * M.m * (xi(0) * xi(0) + xi(1) * xi(1)) + 0.5 * k * xi(2) * xi(2) +
         M.J2 * xi(2) * gamma_dot + 0.5 * M.J2 * gamma_dot * gamma_dot;
}

MatrixXd se2_model_permutation() {
  // Model xi = (v2, v3, v1) in group coordinates, same for the rates.
  MatrixXd pm = MatrixXd::Zero(9, 9);
  for (int i = 0; i < 3; ++i) pm(i, i) = 1.0;
  const int from[3] = {1, 2, 0};
  for (int i = 0; i < 3; ++i) {
    pm(3 + i, 3 + from[i]) = 1.0;
    pm(6 + i, 6 + from[i]) = 1.0;
  }
  return pm;
}

VectorXd se2_model_from_group(const VectorXd& s) {
  require_state(s, 9, "se2 vehicle");
  return se2_model_permutation() * s;
}

ControlledSystem se2_vehicle_system(const Se2VehicleParams& M, bool closed_form_dynamics) {
  M.validate();
  ControlledSystem sys;
  sys.n = 1;
  sys.tag = GroupTag::kSE2;
  sys.controls = 2;
  sys.lagrangian = [M](const VectorXd&, const VectorXd& qd, const Vec3& v) {
    return se2_reduced_lagrangian(M, qd(0), Vec3(v(1), v(2), v(0)));
  };
  if (closed_form_dynamics) {
    // Rows ordered [gamma; rotation; body x; body y].
    sys.dynamics = [M](const VectorXd& s, double) -> VectorXd {
      const Eigen::Vector4d r =
          se2_controlled_equations(M, se2_model_from_group(s), Eigen::Vector2d::Zero());
      VectorXd e(4);
      e << r(3), r(2), r(0), r(1);
      return e;
    };
  }
  sys.cost = [M](const VectorXd&, const VectorXd& u, double) {
    return M.rho1 * u(0) * u(0) + M.rho2 * u(1) * u(1);
  };
  sys.actuated = [](const VectorXd& q) -> MatrixXd {
    MatrixXd b = MatrixXd::Zero(4, 2);
    b(2, 0) = std::cos(q(0));
    b(3, 0) = std::sin(q(0));
    b(0, 1) = 1.0;
    return b;
  };
  sys.unactuated = [M](const VectorXd& q) -> MatrixXd {
    MatrixXd b = MatrixXd::Zero(4, 2);
    b(2, 0) = -std::sin(q(0));
    b(3, 0) = std::cos(q(0));
    b(3, 1) = 1.0;
    b(1, 1) = 1.0 / M.p;
    return b;
  };
  for (double g : {0.0, 0.7, 1.9, -2.5}) sys.rank_samples.push_back(VectorXd::Constant(1, g));
  return sys;
}

SecondOrderProblem se2_vehicle_problem(const Se2VehicleParams& M, const BoundaryData& b,
                                       int N, double h) {
  M.validate();
  const MatrixXd pm = se2_model_permutation();
  SecondOrderProblem p;
  p.name = "se2_vehicle";
  p.n = 1;
  p.m = 2;
  p.tag = GroupTag::kSE2;
  p.ltilde = [M, pm](const VectorXd& s, double) { return se2_ltilde(M, pm * s); };
  p.ltilde_grad = [M, pm](const VectorXd& s, double) -> VectorXd {
    return pm.transpose() * se2_ltilde_grad(M, pm * s);
  };
  p.phi = [M, pm](const VectorXd& s, double) -> VectorXd { return se2_phi(M, pm * s); };
  p.phi_jac = [M, pm](const VectorXd& s, double) -> MatrixXd {
    return se2_phi_jac(M, pm * s) * pm;
  };
  p.boundary = b;
  p.N = N;
  p.h = h;
  return p;
}

// ---------------------------------------------------------------------------
// Ball on a rotating plate.

void BallPlateParams::validate() const {
  require_positive(r, "r");
  require_positive(k2, "k2");
  if (!std::isfinite(Omega) || !std::isfinite(amplitude) || !std::isfinite(frequency)) {
    throw ConfigError("model parameter Omega must be finite");
  }
}

double BallPlateParams::omega(double t) const {
  return Omega + amplitude * std::sin(frequency * t);
}

double BallPlateParams::omega_d1(double t) const {
  return amplitude * frequency * std::cos(frequency * t);
}

double BallPlateParams::omega_d2(double t) const {
  return -amplitude * frequency * frequency * std::sin(frequency * t);
}

double BallPlateParams::c(double t) const { return k2 * omega(t) / (r * r + k2); }
double BallPlateParams::c_d1(double t) const { return k2 * omega_d1(t) / (r * r + k2); }
double BallPlateParams::c_d2(double t) const { return k2 * omega_d2(t) / (r * r + k2); }

double ball_ltilde(const BallPlateParams& P, const VectorXd& s, double t) {
  require_state(s, 12, "ball plate");
  const double c = P.c(t);
  const double a = s(4) + c * s(3);
  const double b = s(5) - c * s(2);
  return 0.5 * a * a + 0.5 * b * b;
}

VectorXd ball_ltilde_grad(const BallPlateParams& P, const VectorXd& s, double t) {
  require_state(s, 12, "ball plate");
  const double c = P.c(t);
  const double a = s(4) + c * s(3);
  const double b = s(5) - c * s(2);
  VectorXd g = VectorXd::Zero(12);
  g(4) = a;
  g(3) = a * c;
  g(5) = b;
  g(2) = -b * c;
  return g;
}

Eigen::Vector3d ball_phi(const BallPlateParams& P, const VectorXd& s, double t) {
  require_state(s, 12, "ball plate");
  const double w = P.omega(t);
  return {s(6) + s(3) / P.r - w * s(0) / P.r, s(7) - s(2) / P.r - w * s(1) / P.r, s(11)};
}

MatrixXd ball_phi_jac(const BallPlateParams& P, const VectorXd& s, double t) {
  require_state(s, 12, "ball plate");
  const double w = P.omega(t);
  MatrixXd j = MatrixXd::Zero(3, 12);
  j(0, 6) = 1.0;
  j(0, 3) = 1.0 / P.r;
  j(0, 0) = -w / P.r;
  j(1, 7) = 1.0;
  j(1, 2) = -1.0 / P.r;
  j(1, 1) = -w / P.r;
  j(2, 11) = 1.0;
  return j;
}

ControlledSystem ball_plate_system(const BallPlateParams& P) {
  P.validate();
  ControlledSystem sys;
  sys.n = 2;
  sys.tag = GroupTag::kSO3;
  sys.controls = 2;
  // Shape equations x'' + c y' = u1, y'' - c x' = u2 and the rolling
  // constraints with w3' = 0 as the unactuated rows.
  sys.dynamics = [P](const VectorXd& s, double t) -> VectorXd {
    const double c = P.c(t);
    VectorXd e(5);
    e << s(4) + c * s(3), s(5) - c * s(2), ball_phi(P, s, t);
    return e;
  };
  sys.cost = [](const VectorXd&, const VectorXd& u, double) { return 0.5 * u.squaredNorm(); };
  sys.actuated = [](const VectorXd&) -> MatrixXd { return MatrixXd::Identity(5, 2); };
  sys.unactuated = [](const VectorXd&) -> MatrixXd {
    return MatrixXd::Identity(5, 5).rightCols(3);
  };
  sys.rank_samples.push_back(VectorXd::Zero(2));
  return sys;
}

SecondOrderProblem ball_plate_problem(const BallPlateParams& P, const BoundaryData& b, int N,
                                      double h) {
  P.validate();
  SecondOrderProblem p;
  p.name = "ball_plate";
  p.n = 2;
  p.m = 3;
  p.tag = GroupTag::kSO3;
  p.ltilde = [P](const VectorXd& s, double t) { return ball_ltilde(P, s, t); };
  p.ltilde_grad = [P](const VectorXd& s, double t) { return ball_ltilde_grad(P, s, t); };
  p.phi = [P](const VectorXd& s, double t) -> VectorXd { return ball_phi(P, s, t); };
  p.phi_jac = [P](const VectorXd& s, double t) { return ball_phi_jac(P, s, t); };
  // The cost Hessian is constant in the derivatives and Phi is affine.
  p.phi_weighted_hess = [](const VectorXd&, double, const VectorXd&) -> MatrixXd {
    return MatrixXd::Zero(12, 12);
  };
  p.ltilde_hess = [P](const VectorXd&, double t) -> MatrixXd {
    const double c = P.c(t);
    MatrixXd hs = MatrixXd::Zero(12, 12);
    // a = x'' + c y', b = y'' - c x'.
    VectorXd da = VectorXd::Zero(12), db = VectorXd::Zero(12);
    da(4) = 1.0;
    da(3) = c;
    db(5) = 1.0;
    db(2) = -c;
    hs = da * da.transpose() + db * db.transpose();
    return hs;
  };
  p.boundary = b;
  p.N = N;
  p.h = h;
  p.trivialization = Trivialization::kRight;
  return p;
}

VectorXd ball_continuous_residual(const BallPlateParams& P, const BallContinuousState& st,
                                  double t, bool time_dependent, Trivialization triv) {
  P.validate();
  const double r = P.r;
  const double w = P.omega(t);
  const double c = P.c(t);
  const double c1 = time_dependent ? P.c_d1(t) : 0.0;
  const double c2 = time_dependent ? P.c_d2(t) : 0.0;
  const double* x = st.x;
  const double* y = st.y;
  const Vec3& l = st.lambda;
  const Vec3& ld = st.lambda_dot;
  VectorXd res(8);
  res(0) = l(0) * w / r - ld(1) / r + x[4] + c2 * y[1] + 3.0 * c1 * y[2] + 2.0 * c * y[3] -
           c * c * x[2] - 2.0 * c * c1 * x[1];
  res(1) = l(1) * w / r + ld(0) / r + y[4] - c2 * x[1] - 3.0 * c1 * x[2] - 2.0 * c * x[3] -
           c * c * y[2] - 2.0 * c * c1 * y[1];
  // Coadjoint transport of the multiplier momentum.
  const Vec3 cross = st.w.cross(l);
  const double sign = triv == Trivialization::kRight ? -1.0 : 1.0;
  res.segment<3>(2) = ld + sign * cross;
  res(5) = st.w(0) + y[1] / r - w * x[0] / r;
  res(6) = st.w(1) - x[1] / r - w * y[0] / r;
  res(7) = st.w_dot(2);
  return res;
}

// ---------------------------------------------------------------------------
// Free rigid body.

ReducedDiscreteLagrangian free_rigid_body_model(const Vec3& inertia, double h) {
  for (int i = 0; i < 3; ++i) require_positive(inertia(i), "inertia");
  require_positive(h, "h");
  const Retraction r = Retraction::cayley(GroupTag::kSO3);
  ReducedDiscreteLagrangian l;
  l.h = h;
  l.eval = [inertia, h, r](const GroupElement& w) {
    const Vec3 xi = r.tau_inv(w) / h;
    return 0.5 * h * xi.dot(inertia.asDiagonal() * xi);
  };
  l.xi_gradient = [inertia, h](const Vec3& xi) -> Vec3 {
    return h * (inertia.asDiagonal() * xi);
  };
  return l;
}

double rigid_body_energy(const Vec3& inertia, const Vec3& xi) {
  return 0.5 * xi.dot(inertia.asDiagonal() * xi);
}

RigidBodyRun march_free_rigid_body(const Vec3& inertia, const GroupElement& g0, const Vec3& w0,
                                   double h, int steps, const Retraction& r, Trivialization t,
                                   double tol) {
  for (int i = 0; i < 3; ++i) require_positive(inertia(i), "inertia");
  require_positive(h, "h");
  if (steps < 1) throw ConfigError("free rigid body: steps must be >= 1");
  const Eigen::DiagonalMatrix<double, 3> in = inertia.asDiagonal();
  SolverConfig cfg;
  cfg.tol_residual = tol;
  cfg.max_iters = 50;

  // Momentum carried forward from an increment: dtau^-T mu (left) or
  // Ad^T dtau^-T mu (right), with mu = h I xi.
  auto forward = [&](const Vec3& xi) -> Vec3 {
    const Vec3 a = r.dtau_inv_matrix(h * xi).transpose() * (h * (in * xi));
    if (t == Trivialization::kLeft) return a;
    return Ad_matrix(r.tau(h * xi)).transpose() * a;
  };
  auto backward = [&](const Vec3& xi) -> Vec3 {
    const Vec3 a = r.dtau_inv_matrix(h * xi).transpose() * (h * (in * xi));
    if (t == Trivialization::kLeft) return Ad_matrix(r.tau(h * xi)).transpose() * a;
    return a;
  };

  RigidBodyRun run;
  run.triv = t;
  run.g.push_back(g0);
  Vec3 target = h * (in * w0);
  Vec3 guess = w0;
  for (int k = 0; k < steps; ++k) {
    const ResidualFn f = [&](const VectorXd& x) -> VectorXd {
      return (forward(Vec3(x)) - target) / h;
    };
    const SolveResult res = solve(f, VectorXd(guess), cfg);
    if (!res.converged) {
      throw Error("free rigid body: step " + std::to_string(k) + " did not converge (" +
                  res.message + ")");
    }
    const Vec3 xi = res.x;
    run.xi.push_back(xi);
    run.iterations.push_back(res.iterations);
    run.residuals.push_back(res.residual_history.back());
    run.g.push_back(maybe_reproject(t == Trivialization::kLeft ? compose(run.g.back(), r.tau(h * xi))
                                                               : compose(r.tau(h * xi), run.g.back())));
    target = backward(xi);
    guess = xi;
  }
  return run;
}

std::vector<Vec3> rigid_body_momenta(const Vec3& inertia, const RigidBodyRun& run, double h,
                                     const Retraction& r) {
  if (run.triv != Trivialization::kLeft) {
    throw ConfigError("rigid body momenta: left-trivialized run required");
  }
  const ReducedDiscreteLagrangian l = free_rigid_body_model(inertia, h);
  const QPairFn pair = [&](const QPoint& a, const QPoint& b) {
    return l.eval(compose(inverse(a.g), b.g));
  };
  std::vector<Vec3> out;
  for (size_t k = 0; k + 1 < run.g.size(); ++k) {
    const QPoint a{VectorXd(), run.g[k]};
    const QPoint b{VectorXd(), run.g[k + 1]};
    Vec3 j;
    for (int i = 0; i < 3; ++i) {
      j(i) = discrete_momentum(pair, a, b, Vec3::Unit(i), MomentumSide::kPlus, r);
    }
    out.push_back(j);
  }
  return out;
}

}  // namespace lpvi
