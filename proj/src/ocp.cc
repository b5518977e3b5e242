#include "lpvi/ocp.h"

#include <cmath>
#include <string>
#include <utility>

#include "lpvi/errors.h"
#include "lpvi/fd.h"

namespace lpvi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Reduction of the controlled system.

VectorXd euler_poincare_operator(const ControlledSystem& sys, const VectorXd& s) {
  if (!sys.lagrangian) throw ConfigError("controlled system: lagrangian is required");
  const int n = sys.n;
  const StateLayout lay{n};
  const int dim = 2 * n + 3;
  auto grad_at = [&](const VectorXd& y) {
    return fd_gradient(
        [&](const VectorXd& v) {
          return sys.lagrangian(v.head(n), v.segment(n, n), Vec3(v.tail<3>()));
        },
        y, 1e-5);
  };
  VectorXd y(dim), dir(dim);
  y << s.segment(lay.q(), n), s.segment(lay.qd(), n), s.segment(lay.xi(), 3);
  dir << s.segment(lay.qd(), n), s.segment(lay.qdd(), n), s.segment(lay.xid(), 3);
  const VectorXd g = grad_at(y);
  // d/dt of the gradient along the curve is its directional derivative.
  const double e = 1e-4;
  const VectorXd dg = (grad_at(y + e * dir) - grad_at(y - e * dir)) / (2.0 * e);
  VectorXd out(n + 3);
  out.head(n) = dg.segment(n, n) - g.head(n);
  const Vec3 mu = g.tail<3>();
  const Vec3 xi = s.segment(lay.xi(), 3);
  out.tail<3>() = dg.tail<3>() - ad_matrix(sys.tag, xi).transpose() * mu;
  return out;
}

ReducedCallbacks reduce_to_variational(const ControlledSystem& sys) {
  const int dim = sys.n + 3;
  if (!sys.actuated || !sys.unactuated || !sys.cost) {
    throw ConfigError("controlled system: basis and cost callbacks are required");
  }
  for (size_t i = 0; i < sys.rank_samples.size(); ++i) {
    const VectorXd& q = sys.rank_samples[i];
    const MatrixXd a = sys.actuated(q);
    const MatrixXd u = sys.unactuated(q);
    if (a.rows() != dim || u.rows() != dim || a.cols() != sys.controls ||
        a.cols() + u.cols() != dim) {
      throw IllPosedBasisError("controlled system: basis shape does not match n + dim g = " +
                               std::to_string(dim));
    }
    MatrixXd b(dim, dim);
    b << a, u;
    Eigen::FullPivLU<MatrixXd> lu(b);
    lu.setThreshold(1e-10);
    if (lu.rank() < dim) {
      throw IllPosedBasisError("controlled system: basis is rank deficient (rank " +
                               std::to_string(lu.rank()) + " of " +
                               std::to_string(dim) + ") at sample " +
                               std::to_string(i));
    }
  }
  const int m = dim - sys.controls;
  auto lhs = [sys](const VectorXd& s, double t) -> VectorXd {
    return sys.dynamics ? sys.dynamics(s, t) : euler_poincare_operator(sys, s);
  };
  ReducedCallbacks out;
  out.m = m;
  out.controls = [sys, lhs](const VectorXd& s, double t) -> VectorXd {
    return sys.actuated(s.head(sys.n)).transpose() * lhs(s, t);
  };
  out.phi = [sys, lhs](const VectorXd& s, double t) -> VectorXd {
    return sys.unactuated(s.head(sys.n)).transpose() * lhs(s, t);
  };
  out.ltilde = [sys, ctl = out.controls](const VectorXd& s, double t) {
    return sys.cost(s, ctl(s, t), t);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Continuous problem and discretization.

const char* convention_name(BoundaryConvention c) {
  return c == BoundaryConvention::kNodal ? "nodal" : "staggered";
}

double SecondOrderProblem::final_time() const {
  return convention == BoundaryConvention::kNodal ? N * h : (N - 1) * h;
}

double SecondOrderProblem::window_time(int i) const {
  const double offset = convention == BoundaryConvention::kNodal ? 0.0 : -0.5 * h;
  return t0 + (i + 1) * h + offset;
}

void SecondOrderProblem::validate() const {
  if (n < 1) throw ConfigError("problem: n must be >= 1");
  if (m < 0) throw ConfigError("problem: m must be >= 0");
  if (N < 6) throw ConfigError("problem: N must be >= 6, got " + std::to_string(N));
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("problem: h must be > 0");
  if (!ltilde) throw ConfigError("problem: Ltilde callback missing");
  if (m > 0 && !phi) throw ConfigError("problem: Phi callback missing");
  const BoundaryData& b = boundary;
  for (const VectorXd* v : {&b.q0, &b.qd0, &b.qT, &b.qdT}) {
    if (v->size() != n) {
      throw SizeError("problem: boundary vectors must have size n = " + std::to_string(n));
    }
    if (!v->allFinite()) throw ConfigError("problem: boundary data must be finite");
  }
  if (!b.xi0.allFinite() || !b.xiT.allFinite()) {
    throw ConfigError("problem: boundary algebra data must be finite");
  }
  check_same_tag(b.g0.tag, tag, "problem boundary g0");
  check_same_tag(b.gT.tag, tag, "problem boundary gT");
  if (!is_valid(b.g0, 1e-8) || !is_valid(b.gT, 1e-8)) {
    throw ConfigError("problem: boundary group elements are not in the group");
  }
}

MatrixXd stencil_matrix(int n, double h) {
  const StateLayout lay{n};
  MatrixXd s = MatrixXd::Zero(lay.size(), lay.size());
  const MatrixXd id = MatrixXd::Identity(n, n);
  for (int j = 0; j < 3; ++j) s.block(lay.q(), j * n, n, n) = id / 3.0;
  s.block(lay.qd(), 0, n, n) = -id / (2.0 * h);
  s.block(lay.qd(), 2 * n, n, n) = id / (2.0 * h);
  s.block(lay.qdd(), 0, n, n) = id / (h * h);
  s.block(lay.qdd(), n, n, n) = -2.0 * id / (h * h);
  s.block(lay.qdd(), 2 * n, n, n) = id / (h * h);
  const Mat3 i3 = Mat3::Identity();
  s.block(lay.xi(), 3 * n, 3, 3) = 0.5 * i3;
  s.block(lay.xi(), 3 * n + 3, 3, 3) = 0.5 * i3;
  s.block(lay.xid(), 3 * n, 3, 3) = -i3 / h;
  s.block(lay.xid(), 3 * n + 3, 3, 3) = i3 / h;
  return s;
}

DiscreteProblem discretize(const SecondOrderProblem& prob) {
  if (!(prob.h > 0.0)) throw ConfigError("discretize: h must be > 0");
  const double h = prob.h;
  const MatrixXd s = stencil_matrix(prob.n, h);
  const SecondOrderProblem p = prob;
  auto time = [p](const WindowContext& ctx) { return p.window_time(ctx.index); };

  // Missing derivatives are taken in state space, where entries are O(1);
  // the stencil chain rule is then exact.
  ContinuousVectorFn lgrad = p.ltilde_grad;
  if (!lgrad) {
    lgrad = [p](const VectorXd& st, double t) -> VectorXd {
      return fd_gradient([&](const VectorXd& v) { return p.ltilde(v, t); }, st);
    };
  }
  ContinuousMatrixFn lhess = p.ltilde_hess;
  if (!lhess) {
    if (p.ltilde_grad) {
      lhess = [lgrad](const VectorXd& st, double t) -> MatrixXd {
        const MatrixXd j =
            fd_jacobian_central([&](const VectorXd& v) { return lgrad(v, t); }, st);
        return 0.5 * (j + j.transpose());
      };
    } else {
      lhess = [p](const VectorXd& st, double t) -> MatrixXd {
        return fd_hessian([&](const VectorXd& v) { return p.ltilde(v, t); }, st);
      };
    }
  }

  DiscreteProblem out;
  DiscreteLagrangian& ld = out.ld;
  ld.order = 2;
  ld.n = prob.n;
  ld.tag = prob.tag;
  ld.is_group_invariant = true;
  ld.eval = [p, s, h, time](const VectorXd& z, const WindowContext& ctx) {
    return h * p.ltilde(s * z, time(ctx));
  };
  ld.gradient = [lgrad, s, h, time](const VectorXd& z, const WindowContext& ctx) -> VectorXd {
    return h * s.transpose() * lgrad(s * z, time(ctx));
  };
  ld.hessian = [lhess, s, h, time](const VectorXd& z, const WindowContext& ctx) -> MatrixXd {
    return h * s.transpose() * lhess(s * z, time(ctx)) * s;
  };

  DiscreteConstraintSet& phi = out.phi;
  phi.m = prob.m;
  phi.order = 2;
  phi.n = prob.n;
  phi.tag = prob.tag;
  phi.is_group_invariant = true;
  if (prob.m > 0) {
    ContinuousMatrixFn pjac = p.phi_jac;
    if (!pjac) {
      pjac = [p](const VectorXd& st, double t) -> MatrixXd {
        return fd_jacobian_central([&](const VectorXd& v) { return p.phi(v, t); }, st);
      };
    }
    ContinuousWeightedHessianFn phess = p.phi_weighted_hess;
    if (!phess) {
      if (p.phi_jac) {
        phess = [pjac](const VectorXd& st, double t, const VectorXd& lam) -> MatrixXd {
          const MatrixXd j = fd_jacobian_central(
              [&](const VectorXd& v) -> VectorXd { return pjac(v, t).transpose() * lam; },
              st);
          return 0.5 * (j + j.transpose());
        };
      } else {
        phess = [p](const VectorXd& st, double t, const VectorXd& lam) -> MatrixXd {
          return fd_hessian([&](const VectorXd& v) { return lam.dot(p.phi(v, t)); }, st);
        };
      }
    }
    phi.eval = [p, s, time](const VectorXd& z, const WindowContext& ctx) -> VectorXd {
      return p.phi(s * z, time(ctx));
    };
    phi.jacobian = [pjac, s, time](const VectorXd& z, const WindowContext& ctx) -> MatrixXd {
      return pjac(s * z, time(ctx)) * s;
    };
    phi.weighted_hessian = [phess, s, time](const VectorXd& z, const WindowContext& ctx,
                                            const VectorXd& lam) -> MatrixXd {
      return s.transpose() * phess(s * z, time(ctx), lam) * s;
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discrete system.

VectorXd OcpResidual::flat() const {
  const VectorXd d = dlp.flat();
  Eigen::Index c = 0;
  for (const auto& v : dlp.constraints) c += v.size();
  VectorXd out(d.size() + 3);
  out << d.head(d.size() - c), closure, d.tail(c);
  return out;
}

namespace {

GroupElement shift(const GroupElement& g, const Vec3& xi, double scale,
                   const Retraction& r, Trivialization t) {
  const GroupElement d = r.tau(scale * xi);
  return t == Trivialization::kLeft ? compose(g, d) : compose(d, g);
}

}  // namespace

OcpSystem::OcpSystem(SecondOrderProblem prob)
    : prob_(std::move(prob)), r_(Retraction::from_name(prob_.tag, prob_.retraction)) {
  prob_.validate();
  disc_ = discretize(prob_);
  const int n = prob_.n, m = prob_.m, big_n = prob_.N;
  layout_.q_offset = 0;
  layout_.q_count = (big_n - 3) * n;
  layout_.xi_offset = layout_.q_count;
  layout_.xi_count = 3 * (big_n - 2);
  layout_.lambda_offset = layout_.xi_offset + layout_.xi_count;
  layout_.lambda_count = m * (big_n - 1);

  rows_.m_offset = 0;
  rows_.m_count = (big_n - 3) * n;
  rows_.g_offset = rows_.m_count;
  rows_.g_count = 3 * (big_n - 3);
  rows_.closure_offset = rows_.g_offset + rows_.g_count;
  rows_.closure_count = 3;
  rows_.c_offset = rows_.closure_offset + 3;
  rows_.c_count = m * (big_n - 1);
  if (unknown_count() != equation_count()) {
    throw SizeError("ocp: " + std::to_string(unknown_count()) + " unknowns for " +
                    std::to_string(equation_count()) + " equations");
  }

  const BoundaryData& b = prob_.boundary;
  const double h = prob_.h;
  const Trivialization t = prob_.trivialization;
  if (prob_.convention == BoundaryConvention::kNodal) {
    q_fixed_ = {b.q0, b.q0 + h * b.qd0, b.qT - h * b.qdT, b.qT};
    g_start_ = b.g0;
    g_target_ = b.gT;
  } else {
    q_fixed_ = {b.q0 - 0.5 * h * b.qd0, b.q0 + 0.5 * h * b.qd0, b.qT - 0.5 * h * b.qdT,
                b.qT + 0.5 * h * b.qdT};
    g_start_ = shift(b.g0, b.xi0, -0.5 * h, r_, t);
    g_target_ = shift(b.gT, b.xiT, 0.5 * h, r_, t);
  }
}

int OcpSystem::q_col(int node) const {
  if (node < 2 || node > prob_.N - 2) return -1;
  return layout_.q_offset + (node - 2) * prob_.n;
}

int OcpSystem::xi_col(int index) const {
  if (index < 1 || index > prob_.N - 2) return -1;
  return layout_.xi_offset + (index - 1) * 3;
}

DiscretePath OcpSystem::boundary_path() const {
  const int big_n = prob_.N, n = prob_.n;
  DiscretePath p;
  p.tag = prob_.tag;
  p.h = prob_.h;
  p.q.assign(big_n + 1, VectorXd::Zero(n));
  p.q[0] = q_fixed_[0];
  p.q[1] = q_fixed_[1];
  p.q[big_n - 1] = q_fixed_[2];
  p.q[big_n] = q_fixed_[3];
  p.xi.assign(big_n, Vec3::Zero());
  p.xi[0] = prob_.boundary.xi0;
  p.xi[big_n - 1] = prob_.boundary.xiT;
  if (prob_.m > 0) p.lambda.assign(big_n - 1, VectorXd::Zero(prob_.m));
  return p;
}

VectorXd OcpSystem::assemble(const DiscretePath& path) const {
  const int big_n = prob_.N, n = prob_.n, m = prob_.m;
  if (path.steps() != big_n || static_cast<int>(path.xi.size()) != big_n ||
      (m > 0 && static_cast<int>(path.lambda.size()) != big_n - 1)) {
    throw SizeError("ocp assemble: path does not match N = " + std::to_string(big_n));
  }
  VectorXd x(unknown_count());
  for (int k = 2; k <= big_n - 2; ++k) {
    if (path.q[k].size() != n) throw SizeError("ocp assemble: q node size mismatch");
    x.segment(q_col(k), n) = path.q[k];
  }
  for (int k = 1; k <= big_n - 2; ++k) x.segment(xi_col(k), 3) = path.xi[k];
  for (int w = 0; w < big_n - 1 && m > 0; ++w) {
    if (path.lambda[w].size() != m) throw SizeError("ocp assemble: multiplier size mismatch");
    x.segment(layout_.lambda_offset + w * m, m) = path.lambda[w];
  }
  return x;
}

DiscretePath OcpSystem::scatter(const VectorXd& x) const {
  if (x.size() != unknown_count()) {
    throw SizeError("ocp scatter: expected " + std::to_string(unknown_count()) +
                    " unknowns, got " + std::to_string(x.size()));
  }
  const int big_n = prob_.N, n = prob_.n, m = prob_.m;
  DiscretePath p = boundary_path();
  for (int k = 2; k <= big_n - 2; ++k) p.q[k] = x.segment(q_col(k), n);
  for (int k = 1; k <= big_n - 2; ++k) p.xi[k] = x.segment(xi_col(k), 3);
  for (int w = 0; w < big_n - 1 && m > 0; ++w) {
    p.lambda[w] = x.segment(layout_.lambda_offset + w * m, m);
  }
  p.g = reconstruct(p);
  return p;
}

VectorXd OcpSystem::initial_guess() const {
  const int big_n = prob_.N;
  DiscretePath p = boundary_path();
  const VectorXd& a = q_fixed_[1];
  const VectorXd& b = q_fixed_[2];
  for (int k = 2; k <= big_n - 2; ++k) {
    p.q[k] = a + (static_cast<double>(k - 1) / (big_n - 2)) * (b - a);
  }
  const GroupElement d = prob_.trivialization == Trivialization::kLeft
                             ? compose(inverse(g_start_), g_target_)
                             : compose(g_target_, inverse(g_start_));
  const Vec3 xi = r_.tau_inv(d) / (big_n * prob_.h);
  for (int k = 1; k <= big_n - 2; ++k) p.xi[k] = xi;
  return assemble(p);
}

std::vector<GroupElement> OcpSystem::reconstruct(const DiscretePath& path) const {
  return reconstruct_path(g_start_, path.xi, prob_.h, r_, prob_.trivialization);
}

OcpResidual OcpSystem::evaluate(const DiscretePath& path) const {
  OcpResidual out;
  const DiscreteConstraintSet* phi = prob_.m > 0 ? &disc_.phi : nullptr;
  out.dlp = dlp_k_residual(disc_.ld, phi, path, r_, prob_.trivialization);
  const std::vector<GroupElement> g = path.g.empty() ? reconstruct(path) : path.g;
  try {
    out.closure = r_.tau_inv(compose(inverse(g.back()), g_target_));
  } catch (const SingularityError& e) {
    throw SingularityError(std::string(e.what()) + " (terminal closure, k=" +
                           std::to_string(prob_.N) + ")");
  }
  return out;
}

VectorXd OcpSystem::residual(const VectorXd& x) const { return evaluate(scatter(x)).flat(); }

double OcpSystem::discrete_cost(const DiscretePath& path) const {
  double c = 0.0;
  for (int w = 0; w <= prob_.N - 2; ++w) {
    c += disc_.ld.eval(pack_window(path, w, 2), WindowContext{w, prob_.h, nullptr});
  }
  return c;
}

OracleReport OcpSystem::oracle(const VectorXd& x, double eps) const {
  const DiscretePath p = scatter(x);
  const DiscreteConstraintSet* phi = prob_.m > 0 ? &disc_.phi : nullptr;
  const DlpResidual assembled = dlp_k_residual(disc_.ld, phi, p, r_, prob_.trivialization);
  const DlpResidual fd = augmented_action_gradient_fd(
      disc_.ld, phi, p.q, p.g, p.lambda, prob_.h, r_, prob_.trivialization, eps);
  return compare_residuals(assembled, fd);
}

MatrixXd OcpSystem::jacobian(const VectorXd& x) const {
  const DiscretePath p = scatter(x);
  const int big_n = prob_.N, n = prob_.n, m = prob_.m;
  const double h = prob_.h;
  const Trivialization t = prob_.trivialization;
  const int wsize = 3 * n + 6;
  const int windows = big_n - 1;
  const DiscreteConstraintSet* phi = m > 0 ? &disc_.phi : nullptr;

  // Per-window gradient, Hessian of L + lambda.Phi and constraint Jacobian.
  std::vector<VectorXd> grad(windows);
  std::vector<MatrixXd> hess(windows), cjac(windows);
  for (int w = 0; w < windows; ++w) {
    const VectorXd z = pack_window(p, w, 2);
    const WindowContext ctx{w, h, nullptr};
    grad[w] = disc_.ld.grad(z, ctx);
    hess[w] = disc_.ld.hess(z, ctx);
    if (phi != nullptr) {
      cjac[w] = phi->jac(z, ctx);
      grad[w] += cjac[w].transpose() * p.lambda[w];
      hess[w] += phi->weighted_hess(z, ctx, p.lambda[w]);
    }
  }
  // Unknown column of window variable v, or -1 for fixed data.
  auto zcol = [&](int w, int v) {
    if (v < 3 * n) {
      const int c = q_col(w + v / n);
      return c < 0 ? -1 : c + v % n;
    }
    const int e = v - 3 * n;
    const int c = xi_col(w + e / 3);
    return c < 0 ? -1 : c + e % 3;
  };
  auto lambda_col = [&](int w) { return layout_.lambda_offset + w * m; };

  MatrixXd jac = MatrixXd::Zero(equation_count(), unknown_count());
  // Adds d/dx of sum over windows of rows [offset, offset + len) of grad[w].
  auto add_window_rows = [&](MatrixXd& out, int w, int offset, int len,
                             const MatrixXd& left) {
    for (int v = 0; v < wsize; ++v) {
      const int c = zcol(w, v);
      if (c >= 0) out.col(c) += left * hess[w].block(offset, v, len, 1);
    }
    if (m > 0) {
      out.middleCols(lambda_col(w), m) +=
          left * cjac[w].middleCols(offset, len).transpose();
    }
  };

  for (int i = 2; i <= big_n - 2; ++i) {
    MatrixXd rows = MatrixXd::Zero(n, unknown_count());
    const MatrixXd id = MatrixXd::Identity(n, n);
    for (int j = 0; j <= 2; ++j) add_window_rows(rows, i - j, j * n, n, id);
    jac.middleRows(rows_.m_offset + (i - 2) * n, n) = rows;
  }

  auto mu = [&](int q) {
    Vec3 s = Vec3::Zero();
    for (int j = 0; j < 2; ++j) {
      const int w = q - j;
      if (w >= 0 && w < windows) s += grad[w].segment(3 * n + 3 * j, 3);
    }
    return s;
  };
  auto add_mu = [&](MatrixXd& out, int q, const Mat3& left) {
    for (int j = 0; j < 2; ++j) {
      const int w = q - j;
      if (w >= 0 && w < windows) add_window_rows(out, w, 3 * n + 3 * j, 3, left);
    }
  };
  for (int i = 2; i <= big_n - 2; ++i) {
    const Vec3 xp = h * p.xi[i - 1], xn = h * p.xi[i];
    const Vec3 mp = mu(i - 1), mn = mu(i);
    const Mat3 dip = r_.dtau_inv_matrix(xp), din = r_.dtau_inv_matrix(xn);
    const Vec3 ap = dip.transpose() * mp, an = din.transpose() * mn;
    MatrixXd rows = MatrixXd::Zero(3, unknown_count());
    // d/dxi of dtau^-T(h xi) mu, column j.
    auto d_dinv = [&](const Vec3& x, const Vec3& mv) {
      Mat3 d;
      for (int j = 0; j < 3; ++j) d.col(j) = h * r_.dtau_inv_partial(x, j).transpose() * mv;
      return d;
    };
    // d/dxi of Ad_{tau(h xi)}^T a, column j.
    auto d_adt = [&](const Vec3& x, const Vec3& a) {
      const Mat3 ad_g = Ad_matrix(r_.tau(x));
      const Mat3 dt = r_.dtau_matrix(x);
      Mat3 d;
      for (int j = 0; j < 3; ++j) {
        d.col(j) = h * ad_g.transpose() * ad_matrix(prob_.tag, dt.col(j)).transpose() * a;
      }
      return d;
    };
    Mat3 dxp, dxn, lp, ln;
    if (t == Trivialization::kLeft) {
      const Mat3 adp = Ad_matrix(r_.tau(xp)).transpose();
      lp = adp * dip.transpose() / h;
      ln = -din.transpose() / h;
      dxp = (d_adt(xp, ap) + adp * d_dinv(xp, mp)) / h;
      dxn = -d_dinv(xn, mn) / h;
    } else {
      const Mat3 adn = Ad_matrix(r_.tau(xn)).transpose();
      lp = dip.transpose() / h;
      ln = -adn * din.transpose() / h;
      dxp = d_dinv(xp, mp) / h;
      dxn = -(d_adt(xn, an) + adn * d_dinv(xn, mn)) / h;
    }
    add_mu(rows, i - 1, lp);
    add_mu(rows, i, ln);
    if (xi_col(i - 1) >= 0) rows.middleCols(xi_col(i - 1), 3) += dxp;
    if (xi_col(i) >= 0) rows.middleCols(xi_col(i), 3) += dxn;
    jac.middleRows(rows_.g_offset + (i - 2) * 3, 3) = rows;
  }

  // Closure C = tau^-1(g_N^-1 g_T).
  {
    const GroupElement gn_inv = inverse(p.g.back());
    const Vec3 c = r_.tau_inv(compose(gn_inv, g_target_));
    const Mat3 dinv_c = r_.dtau_inv_matrix(c);
    for (int k = 1; k <= big_n - 2; ++k) {
      const GroupElement& anchor = t == Trivialization::kLeft ? p.g[k] : p.g[k + 1];
      const Mat3 rel = t == Trivialization::kLeft ? Ad_matrix(compose(gn_inv, anchor))
                                                  : Ad_matrix(inverse(anchor));
      jac.block(rows_.closure_offset, xi_col(k), 3, 3) =
          -h * dinv_c * rel * r_.dtau_matrix(h * p.xi[k]);
    }
  }

  for (int w = 0; w < windows && m > 0; ++w) {
    for (int v = 0; v < wsize; ++v) {
      const int c = zcol(w, v);
      if (c >= 0) jac.block(rows_.c_offset + w * m, c, m, 1) += cjac[w].col(v);
    }
  }
  return jac;
}

}  // namespace lpvi
