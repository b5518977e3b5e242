#pragma once

// Residual assembly for discrete Euler-Lagrange, Euler-Poincare and k-th
// order Lagrange-Poincare equations, with and without constraints.
//
// A window i of an order-k discrete Lagrangian sees the packed vector
//
//   z = [q_i, ..., q_{i+k}, xi_i, ..., xi_{i+k-1}]
//
// with each q of size n and each xi of size 3. Group-part residuals are
// written in algebra coordinates through Ad^T and dtau^{-T} chains and are
// exactly the gradient of the discrete action under trivialized variations
// g_i <- g_i tau(e eta) (left) or g_i <- tau(e eta) g_i (right).

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpvi/lie.h"
#include "lpvi/retraction.h"

namespace lpvi {

enum class Trivialization { kLeft, kRight };

const char* trivialization_name(Trivialization t);

struct WindowContext {
  int index = 0;
  double h = 1.0;
  // Base group point g_i; only set for non-invariant Lagrangians.
  const GroupElement* base = nullptr;
};

using WindowScalarFn =
    std::function<double(const Eigen::VectorXd&, const WindowContext&)>;
using WindowVectorFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const WindowContext&)>;
using WindowMatrixFn =
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const WindowContext&)>;
using WindowWeightedHessianFn = std::function<Eigen::MatrixXd(
    const Eigen::VectorXd&, const WindowContext&, const Eigen::VectorXd&)>;

struct DiscreteLagrangian {
  int order = 2;
  int n = 0;
  GroupTag tag = GroupTag::kSE2;
  bool is_group_invariant = true;
  WindowScalarFn eval;
  // Optional analytic derivatives; central differences otherwise.
  WindowVectorFn gradient;
  WindowMatrixFn hessian;

  int window_size() const { return (order + 1) * n + 3 * order; }
  Eigen::VectorXd grad(const Eigen::VectorXd& z, const WindowContext& ctx) const;
  Eigen::MatrixXd hess(const Eigen::VectorXd& z, const WindowContext& ctx) const;
};

struct DiscreteConstraintSet {
  int m = 0;
  int order = 2;
  int n = 0;
  GroupTag tag = GroupTag::kSE2;
  bool is_group_invariant = true;
  WindowVectorFn eval;
  // Optional: m x window_size Jacobian, and sum_a lambda_a Hess(Phi_a).
  WindowMatrixFn jacobian;
  WindowWeightedHessianFn weighted_hessian;

  int window_size() const { return (order + 1) * n + 3 * order; }
  Eigen::MatrixXd jac(const Eigen::VectorXd& z, const WindowContext& ctx) const;
  Eigen::MatrixXd weighted_hess(const Eigen::VectorXd& z, const WindowContext& ctx,
                                const Eigen::VectorXd& lambda) const;
};

struct DiscretePath {
  GroupTag tag = GroupTag::kSE2;
  double h = 0.0;
  std::vector<Eigen::VectorXd> q;       // N+1 nodes
  std::vector<Vec3> xi;                 // N increments
  std::vector<Eigen::VectorXd> lambda;  // N-k+1 windows (may be empty)
  std::vector<GroupElement> g;          // N+1 nodes (may be empty if invariant)

  int steps() const { return static_cast<int>(q.size()) - 1; }
};

// Packs window i of an order-k Lagrangian.
Eigen::VectorXd pack_window(const DiscretePath& path, int i, int order);

// g_{k+1} = g_k tau(h xi_k) (left) or tau(h xi_k) g_k (right).
std::vector<GroupElement> reconstruct_path(const GroupElement& g0,
                                           const std::vector<Vec3>& xi, double h,
                                           const Retraction& r, Trivialization t);
// xi_k = tau^-1(g_k^-1 g_{k+1}) / h (left) or tau^-1(g_{k+1} g_k^-1) / h.
std::vector<Vec3> algebra_from_group(const std::vector<GroupElement>& g, double h,
                                     const Retraction& r, Trivialization t);

struct DlpResidual {
  int first_node = 0;                      // stationarity rows start here
  std::vector<Eigen::VectorXd> m_part;     // nodes first_node..N-k
  std::vector<Vec3> g_part;                // same nodes
  std::vector<Eigen::VectorXd> constraints;  // windows 0..N-k

  // [m_part | g_part | constraints]
  Eigen::VectorXd flat() const;
};

// Group row for node i given the summed algebra gradients mu_{i-1}, mu_i.
Vec3 group_row(const Vec3& xi_prev, const Vec3& mu_prev, const Vec3& xi_next,
               const Vec3& mu_next, double h, const Retraction& r,
               Trivialization t);

// Discrete second-order equations written term by term (k = 2, m = 0).
DlpResidual dlp2_residual(const DiscreteLagrangian& ld, const DiscretePath& path,
                          const Retraction& r,
                          Trivialization t = Trivialization::kLeft);

// Higher-order discrete equations with constraints. phi may be null (m = 0).
DlpResidual dlp_k_residual(const DiscreteLagrangian& ld,
                           const DiscreteConstraintSet* phi,
                           const DiscretePath& path, const Retraction& r,
                           Trivialization t = Trivialization::kLeft);

// First-order discrete Euler-Lagrange residual D1 L(q_k, q_{k+1}) +
// D2 L(q_{k-1}, q_k) for k = 1..N-1.
using PairFn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
std::vector<Eigen::VectorXd> del_residual_first_order(
    const PairFn& ld, const std::vector<Eigen::VectorXd>& q);

// Reduced discrete Lagrangian on G for the discrete Euler-Poincare equations.
struct ReducedDiscreteLagrangian {
  double h = 1.0;
  std::function<double(const GroupElement&)> eval;
  // Optional gradient of xi -> eval(tau(h xi)).
  std::function<Vec3(const Vec3&)> xi_gradient;
};

Vec3 reduced_xi_gradient(const ReducedDiscreteLagrangian& l, const Vec3& xi,
                         const Retraction& r);

// Residual at nodes 1..N-1 given increments W_0..W_{N-1}.
std::vector<Vec3> dep_residual(const ReducedDiscreteLagrangian& l,
                               const std::vector<GroupElement>& w,
                               const Retraction& r,
                               Trivialization t = Trivialization::kLeft);

// A point of Q = M x G.
struct QPoint {
  Eigen::VectorXd q;
  GroupElement g;
};
using QPairFn = std::function<double(const QPoint&, const QPoint&)>;
enum class MomentumSide { kPlus, kMinus };

// J+(xi) = <D2 L, xi_Q(b)>, J-(xi) = -<D1 L, xi_Q(a)> with G acting by left
// multiplication on the group factor.
double discrete_momentum(const QPairFn& ld, const QPoint& a, const QPoint& b,
                         const Vec3& xi, MomentumSide side, const Retraction& r);

// Discrete augmented action sum_w L(window w) + lambda_w . Phi(window w) with
// xi recomputed from the group nodes.
double augmented_action(const DiscreteLagrangian& ld,
                        const DiscreteConstraintSet* phi,
                        const std::vector<Eigen::VectorXd>& q,
                        const std::vector<GroupElement>& g,
                        const std::vector<Eigen::VectorXd>& lambda, double h,
                        const Retraction& r, Trivialization t);

// Central-difference gradient of augmented_action over interior q, interior
// trivialized g and all lambda, laid out like DlpResidual::flat().
DlpResidual augmented_action_gradient_fd(
    const DiscreteLagrangian& ld, const DiscreteConstraintSet* phi,
    const std::vector<Eigen::VectorXd>& q, const std::vector<GroupElement>& g,
    const std::vector<Eigen::VectorXd>& lambda, double h, const Retraction& r,
    Trivialization t, double eps = 1e-5);

struct OracleReport {
  double max_m = 0.0;
  double max_g = 0.0;
  double max_c = 0.0;

  double max() const;
  std::string worst_block() const;
};

OracleReport compare_residuals(const DlpResidual& assembled,
                               const DlpResidual& oracle);

}  // namespace lpvi
