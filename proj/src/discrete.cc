#include "lpvi/discrete.h"

#include <cmath>
#include <limits>
#include <string>

#include "lpvi/fd.h"

namespace lpvi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* trivialization_name(Trivialization t) {
  return t == Trivialization::kLeft ? "left" : "right";
}

VectorXd DiscreteLagrangian::grad(const VectorXd& z, const WindowContext& ctx) const {
  if (gradient) return gradient(z, ctx);
  return fd_gradient([&](const VectorXd& x) { return eval(x, ctx); }, z);
}

MatrixXd DiscreteLagrangian::hess(const VectorXd& z, const WindowContext& ctx) const {
  if (hessian) return hessian(z, ctx);
  if (gradient) {
    MatrixXd h = fd_jacobian_central(
        [&](const VectorXd& x) { return gradient(x, ctx); }, z);
    return 0.5 * (h + h.transpose());
  }
  return fd_hessian([&](const VectorXd& x) { return eval(x, ctx); }, z);
}

MatrixXd DiscreteConstraintSet::jac(const VectorXd& z, const WindowContext& ctx) const {
  if (jacobian) return jacobian(z, ctx);
  return fd_jacobian_central([&](const VectorXd& x) { return eval(x, ctx); }, z);
}

MatrixXd DiscreteConstraintSet::weighted_hess(const VectorXd& z,
                                              const WindowContext& ctx,
                                              const VectorXd& lambda) const {
  if (weighted_hessian) return weighted_hessian(z, ctx, lambda);
  if (jacobian) {
    MatrixXd h = fd_jacobian_central(
        [&](const VectorXd& x) -> VectorXd {
          return jacobian(x, ctx).transpose() * lambda;
        },
        z);
    return 0.5 * (h + h.transpose());
  }
  return fd_hessian(
      [&](const VectorXd& x) { return lambda.dot(eval(x, ctx)); }, z);
}

VectorXd pack_window(const DiscretePath& path, int i, int order) {
  const int n = path.q.empty() ? 0 : static_cast<int>(path.q[0].size());
  VectorXd z((order + 1) * n + 3 * order);
  for (int j = 0; j <= order; ++j) z.segment(j * n, n) = path.q[i + j];
  for (int j = 0; j < order; ++j) {
    z.segment((order + 1) * n + 3 * j, 3) = path.xi[i + j];
  }
  return z;
}

std::vector<GroupElement> reconstruct_path(const GroupElement& g0,
                                           const std::vector<Vec3>& xi, double h,
                                           const Retraction& r, Trivialization t) {
  std::vector<GroupElement> g;
  g.reserve(xi.size() + 1);
  g.push_back(g0);
  for (const Vec3& x : xi) {
    const GroupElement step = r.tau(h * x);
    g.push_back(maybe_reproject(t == Trivialization::kLeft ? compose(g.back(), step)
                                                           : compose(step, g.back())));
  }
  return g;
}

std::vector<Vec3> algebra_from_group(const std::vector<GroupElement>& g, double h,
                                     const Retraction& r, Trivialization t) {
  std::vector<Vec3> xi;
  for (size_t k = 0; k + 1 < g.size(); ++k) {
    const GroupElement w = t == Trivialization::kLeft
                               ? compose(inverse(g[k]), g[k + 1])
                               : compose(g[k + 1], inverse(g[k]));
    try {
      xi.push_back(r.tau_inv(w) / h);
    } catch (const SingularityError& e) {
      throw SingularityError(std::string(e.what()) + " (increment k=" +
                             std::to_string(k) + ")");
    }
  }
  return xi;
}

VectorXd DlpResidual::flat() const {
  Eigen::Index size = 3 * static_cast<Eigen::Index>(g_part.size());
  for (const auto& v : m_part) size += v.size();
  for (const auto& v : constraints) size += v.size();
  VectorXd out(size);
  Eigen::Index at = 0;
  for (const auto& v : m_part) {
    out.segment(at, v.size()) = v;
    at += v.size();
  }
  for (const auto& v : g_part) {
    out.segment(at, 3) = v;
    at += 3;
  }
  for (const auto& v : constraints) {
    out.segment(at, v.size()) = v;
    at += v.size();
  }
  return out;
}

Vec3 group_row(const Vec3& xi_prev, const Vec3& mu_prev, const Vec3& xi_next,
               const Vec3& mu_next, double h, const Retraction& r,
               Trivialization t) {
  const Vec3 a = r.dtau_inv_matrix(h * xi_prev).transpose() * mu_prev;
  const Vec3 b = r.dtau_inv_matrix(h * xi_next).transpose() * mu_next;
  if (t == Trivialization::kLeft) {
    const Vec3 ad_a = Ad_matrix(r.tau(h * xi_prev)).transpose() * a;
    return (ad_a - b) / h;
  }
  const Vec3 ad_b = Ad_matrix(r.tau(h * xi_next)).transpose() * b;
  return (a - ad_b) / h;
}

namespace {

void check_path(const DiscretePath& path, int order, int n, int lambda_m) {
  const int steps = path.steps();
  if (steps <= 2 * order) {
    throw SizeError("discrete path has N=" + std::to_string(steps) +
                    " steps; order " + std::to_string(order) +
                    " requires N > " + std::to_string(2 * order));
  }
  if (static_cast<int>(path.xi.size()) < steps) {
    throw SizeError("discrete path needs " + std::to_string(steps) +
                    " algebra increments, has " + std::to_string(path.xi.size()));
  }
  for (const auto& q : path.q) {
    if (q.size() != n) throw SizeError("discrete path: q node dimension mismatch");
  }
  if (lambda_m > 0) {
    if (static_cast<int>(path.lambda.size()) != steps - order + 1) {
      throw SizeError("discrete path: expected " +
                      std::to_string(steps - order + 1) +
                      " multiplier windows, got " +
                      std::to_string(path.lambda.size()));
    }
    for (const auto& l : path.lambda) {
      if (l.size() != lambda_m) throw SizeError("discrete path: multiplier size mismatch");
    }
  }
}

WindowContext window_context(const DiscretePath& path, int i, bool invariant) {
  WindowContext ctx{i, path.h, nullptr};
  if (!invariant) ctx.base = &path.g.at(i);
  return ctx;
}

// Trivialized derivative of a window function with respect to its base point.
Vec3 base_gradient(const std::function<double(const WindowContext&)>& f,
                   const DiscretePath& path, int i, const Retraction& r,
                   Trivialization t) {
  const double eps = default_fd_step();
  Vec3 out;
  for (int j = 0; j < 3; ++j) {
    auto at = [&](double e) {
      const GroupElement d = r.tau(e * Vec3::Unit(j));
      const GroupElement base = t == Trivialization::kLeft ? compose(path.g[i], d)
                                                           : compose(d, path.g[i]);
      WindowContext ctx{i, path.h, &base};
      return f(ctx);
    };
    out(j) = (at(eps) - at(-eps)) / (2.0 * eps);
  }
  return out;
}

struct WindowData {
  VectorXd grad;  // gradient of L + lambda.Phi over z
  Vec3 base = Vec3::Zero();
};

std::vector<WindowData> window_gradients(const DiscreteLagrangian& ld,
                                         const DiscreteConstraintSet* phi,
                                         const DiscretePath& path,
                                         const Retraction& r, Trivialization t) {
  const int k = ld.order;
  const int windows = path.steps() - k + 1;
  const bool constrained = phi != nullptr && phi->m > 0;
  std::vector<WindowData> out(windows);
  for (int w = 0; w < windows; ++w) {
    const VectorXd z = pack_window(path, w, k);
    const WindowContext ctx = window_context(path, w, ld.is_group_invariant);
    out[w].grad = ld.grad(z, ctx);
    if (!ld.is_group_invariant) {
      out[w].base = base_gradient(
          [&](const WindowContext& c) { return ld.eval(z, c); }, path, w, r, t);
    }
    if (constrained) {
      const WindowContext pctx = window_context(path, w, phi->is_group_invariant);
      const VectorXd& lam = path.lambda[w];
      out[w].grad += phi->jac(z, pctx).transpose() * lam;
      if (!phi->is_group_invariant) {
        out[w].base += base_gradient(
            [&](const WindowContext& c) { return lam.dot(phi->eval(z, c)); }, path,
            w, r, t);
      }
    }
  }
  return out;
}

}  // namespace

DlpResidual dlp2_residual(const DiscreteLagrangian& ld, const DiscretePath& path,
                          const Retraction& r, Trivialization t) {
  if (ld.order != 2) throw SizeError("dlp2_residual: Lagrangian order must be 2");
  if (path.steps() < 5) {
    throw SizeError("dlp2_residual: need N >= 5 steps, got " +
                    std::to_string(path.steps()));
  }
  check_path(path, 2, ld.n, 0);
  const int n = ld.n;
  const int big_n = path.steps();
  const std::vector<WindowData> w = window_gradients(ld, nullptr, path, r, t);
  // Slot offsets inside a window: q_0, q_1, q_2, xi_0, xi_1.
  auto d_q = [&](int slot, int window) -> VectorXd {
    return w[window].grad.segment(slot * n, n);
  };
  auto d_xi = [&](int slot, int window) -> Vec3 {
    return w[window].grad.segment(3 * n + 3 * slot, 3);
  };
  DlpResidual out;
  out.first_node = 2;
  for (int k = 2; k <= big_n - 2; ++k) {
    // D1 L(q_k, q_{k+1}, q_{k+2}) + D2 L(q_{k-1}, q_k, q_{k+1})
    //   + D3 L(q_{k-2}, q_{k-1}, q_k)
    VectorXd m_row = d_q(0, k) + d_q(1, k - 1);
    m_row += d_q(2, k - 2);
    out.m_part.push_back(m_row);
    // D1 L|_g(xi_{k-1}, xi_k) + D2 L|_g(xi_{k-2}, xi_{k-1}) and the same one
    // step later.
    const Vec3 mu_prev = d_xi(0, k - 1) + d_xi(1, k - 2);
    const Vec3 mu_next = d_xi(0, k) + d_xi(1, k - 1);
    Vec3 g_row = group_row(path.xi[k - 1], mu_prev, path.xi[k], mu_next, path.h,
                           r, t);
    if (!ld.is_group_invariant) g_row += w[k].base;
    out.g_part.push_back(g_row);
  }
  return out;
}

DlpResidual dlp_k_residual(const DiscreteLagrangian& ld,
                           const DiscreteConstraintSet* phi,
                           const DiscretePath& path, const Retraction& r,
                           Trivialization t) {
  const int k = ld.order;
  const int m = phi == nullptr ? 0 : phi->m;
  if (phi != nullptr && (phi->order != k || phi->n != ld.n)) {
    throw SizeError("dlp_k_residual: constraint window shape differs from L_d");
  }
  check_path(path, k, ld.n, m);
  const int n = ld.n;
  const int big_n = path.steps();
  const std::vector<WindowData> w = window_gradients(ld, phi, path, r, t);
  const int windows = static_cast<int>(w.size());

  auto mu = [&](int p) {
    Vec3 s = Vec3::Zero();
    for (int j = 0; j < k; ++j) {
      const int win = p - j;
      if (win < 0 || win >= windows) continue;
      s += w[win].grad.segment((k + 1) * n + 3 * j, 3);
    }
    return s;
  };

  DlpResidual out;
  out.first_node = k;
  for (int i = k; i <= big_n - k; ++i) {
    VectorXd m_row = VectorXd::Zero(n);
    for (int j = 0; j <= k; ++j) m_row += w[i - j].grad.segment(j * n, n);
    out.m_part.push_back(m_row);
    Vec3 g_row = group_row(path.xi[i - 1], mu(i - 1), path.xi[i], mu(i), path.h, r, t);
    const bool has_base = !ld.is_group_invariant ||
                          (phi != nullptr && m > 0 && !phi->is_group_invariant);
    if (has_base) g_row += w[i].base;
    out.g_part.push_back(g_row);
  }
  if (m > 0) {
    for (int i = 0; i < windows; ++i) {
      const VectorXd z = pack_window(path, i, k);
      out.constraints.push_back(
          phi->eval(z, window_context(path, i, phi->is_group_invariant)));
    }
  }
  return out;
}

std::vector<VectorXd> del_residual_first_order(const PairFn& ld,
                                               const std::vector<VectorXd>& q) {
  if (q.size() < 3) throw SizeError("del_residual_first_order: need >= 3 nodes");
  const Eigen::Index n = q[0].size();
  auto pair_grad = [&](const VectorXd& a, const VectorXd& b) {
    VectorXd z(2 * n);
    z << a, b;
    return fd_gradient(
        [&](const VectorXd& x) { return ld(x.head(n), x.tail(n)); }, z);
  };
  std::vector<VectorXd> out;
  for (size_t k = 1; k + 1 < q.size(); ++k) {
    const VectorXd fwd = pair_grad(q[k], q[k + 1]);
    const VectorXd bwd = pair_grad(q[k - 1], q[k]);
    out.push_back(fwd.head(n) + bwd.tail(n));
  }
  return out;
}

Vec3 reduced_xi_gradient(const ReducedDiscreteLagrangian& l, const Vec3& xi,
                         const Retraction& r) {
  if (l.xi_gradient) return l.xi_gradient(xi);
  const VectorXd g = fd_gradient(
      [&](const VectorXd& x) { return l.eval(r.tau(l.h * Vec3(x))); }, VectorXd(xi));
  return Vec3(g);
}

std::vector<Vec3> dep_residual(const ReducedDiscreteLagrangian& l,
                               const std::vector<GroupElement>& w,
                               const Retraction& r, Trivialization t) {
  std::vector<Vec3> xi;
  std::vector<Vec3> mu;
  for (size_t k = 0; k < w.size(); ++k) {
    try {
      xi.push_back(r.tau_inv(w[k]) / l.h);
    } catch (const SingularityError& e) {
      throw SingularityError(std::string(e.what()) + " (increment k=" +
                             std::to_string(k) + ")");
    }
    mu.push_back(reduced_xi_gradient(l, xi.back(), r));
  }
  std::vector<Vec3> out;
  for (size_t k = 1; k < w.size(); ++k) {
    out.push_back(group_row(xi[k - 1], mu[k - 1], xi[k], mu[k], l.h, r, t));
  }
  return out;
}

double discrete_momentum(const QPairFn& ld, const QPoint& a, const QPoint& b,
                         const Vec3& xi, MomentumSide side, const Retraction& r) {
  if (xi.isZero(0.0)) return 0.0;
  const double scale = std::max(1.0, xi.norm());
  const double step = 1e-3 / scale;
  if (side == MomentumSide::kPlus) {
    return fd_derivative5(
        [&](double e) {
          return ld(a, QPoint{b.q, compose(r.tau(e * xi), b.g)});
        },
        step);
  }
  return -fd_derivative5(
      [&](double e) { return ld(QPoint{a.q, compose(r.tau(e * xi), a.g)}, b); },
      step);
}

double augmented_action(const DiscreteLagrangian& ld,
                        const DiscreteConstraintSet* phi,
                        const std::vector<VectorXd>& q,
                        const std::vector<GroupElement>& g,
                        const std::vector<VectorXd>& lambda, double h,
                        const Retraction& r, Trivialization t) {
  DiscretePath path;
  path.tag = ld.tag;
  path.h = h;
  path.q = q;
  path.g = g;
  path.xi = algebra_from_group(g, h, r, t);
  path.lambda = lambda;
  const int k = ld.order;
  const int windows = path.steps() - k + 1;
  double s = 0.0;
  for (int w = 0; w < windows; ++w) {
    const VectorXd z = pack_window(path, w, k);
    s += ld.eval(z, window_context(path, w, ld.is_group_invariant));
    if (phi != nullptr && phi->m > 0) {
      s += lambda[w].dot(
          phi->eval(z, window_context(path, w, phi->is_group_invariant)));
    }
  }
  return s;
}

DlpResidual augmented_action_gradient_fd(
    const DiscreteLagrangian& ld, const DiscreteConstraintSet* phi,
    const std::vector<VectorXd>& q, const std::vector<GroupElement>& g,
    const std::vector<VectorXd>& lambda, double h, const Retraction& r,
    Trivialization t, double eps) {
  const int k = ld.order;
  const int big_n = static_cast<int>(q.size()) - 1;
  auto action = [&](const std::vector<VectorXd>& qq,
                    const std::vector<GroupElement>& gg,
                    const std::vector<VectorXd>& ll) {
    return augmented_action(ld, phi, qq, gg, ll, h, r, t);
  };
  DlpResidual out;
  out.first_node = k;
  for (int i = k; i <= big_n - k; ++i) {
    VectorXd dq(ld.n);
    for (int a = 0; a < ld.n; ++a) {
      std::vector<VectorXd> qp = q, qm = q;
      qp[i](a) += eps;
      qm[i](a) -= eps;
      dq(a) = (action(qp, g, lambda) - action(qm, g, lambda)) / (2.0 * eps);
    }
    out.m_part.push_back(dq);
    Vec3 dg;
    for (int j = 0; j < 3; ++j) {
      std::vector<GroupElement> gp = g, gm = g;
      const GroupElement up = r.tau(eps * Vec3::Unit(j));
      const GroupElement dn = r.tau(-eps * Vec3::Unit(j));
      if (t == Trivialization::kLeft) {
        gp[i] = compose(g[i], up);
        gm[i] = compose(g[i], dn);
      } else {
        gp[i] = compose(up, g[i]);
        gm[i] = compose(dn, g[i]);
      }
      dg(j) = (action(q, gp, lambda) - action(q, gm, lambda)) / (2.0 * eps);
    }
    out.g_part.push_back(dg);
  }
  if (phi != nullptr && phi->m > 0) {
    for (size_t w = 0; w < lambda.size(); ++w) {
      VectorXd dl(phi->m);
      for (int a = 0; a < phi->m; ++a) {
        std::vector<VectorXd> lp = lambda, lm = lambda;
        lp[w](a) += eps;
        lm[w](a) -= eps;
        dl(a) = (action(q, g, lp) - action(q, g, lm)) / (2.0 * eps);
      }
      out.constraints.push_back(dl);
    }
  }
  return out;
}

double OracleReport::max() const { return std::max({max_m, max_g, max_c}); }

std::string OracleReport::worst_block() const {
  if (max_m >= max_g && max_m >= max_c) return "M-part";
  if (max_g >= max_c) return "G-part";
  return "constraints";
}

OracleReport compare_residuals(const DlpResidual& assembled,
                               const DlpResidual& oracle) {
  if (assembled.m_part.size() != oracle.m_part.size() ||
      assembled.g_part.size() != oracle.g_part.size() ||
      assembled.constraints.size() != oracle.constraints.size()) {
    throw SizeError("compare_residuals: block sizes differ");
  }
  OracleReport rep;
  for (size_t i = 0; i < oracle.m_part.size(); ++i) {
    if (oracle.m_part[i].size() > 0) {
      rep.max_m = std::max(
          rep.max_m, (assembled.m_part[i] - oracle.m_part[i]).cwiseAbs().maxCoeff());
    }
  }
  for (size_t i = 0; i < oracle.g_part.size(); ++i) {
    rep.max_g = std::max(
        rep.max_g, (assembled.g_part[i] - oracle.g_part[i]).cwiseAbs().maxCoeff());
  }
  for (size_t i = 0; i < oracle.constraints.size(); ++i) {
    rep.max_c = std::max(rep.max_c, (assembled.constraints[i] - oracle.constraints[i])
                                        .cwiseAbs()
                                        .maxCoeff());
  }
  return rep;
}

}  // namespace lpvi
