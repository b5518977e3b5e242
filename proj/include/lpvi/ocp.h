#pragma once

// Optimal control of underactuated systems on M x G as a second-order
// constrained variational problem, and its discrete root-finding form.
//
// Continuous states are packed as
//
//   s = [q (n), qdot (n), qddot (n), xi (3), xidot (3)]
//
// and the discrete unknowns as
//
//   x = [q_2 .. q_{N-2} | xi_1 .. xi_{N-2} | lambda^0 .. lambda^{N-2}]
//
// with strides n, 3 and m. Nodes q_0, q_1, q_{N-1}, q_N and increments xi_0,
// xi_{N-1} come from boundary data. Equations are ordered as M-part rows at
// nodes 2..N-2, group rows at the same nodes, the terminal closure
// tau^-1(g_N^-1 g(T)) = 0 and the constraints at windows 0..N-2.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpvi/discrete.h"
#include "lpvi/lie.h"
#include "lpvi/retraction.h"

namespace lpvi {

struct StateLayout {
  int n = 0;

  int size() const { return 3 * n + 6; }
  int q() const { return 0; }
  int qd() const { return n; }
  int qdd() const { return 2 * n; }
  int xi() const { return 3 * n; }
  int xid() const { return 3 * n + 3; }
};

using ContinuousScalarFn = std::function<double(const Eigen::VectorXd&, double)>;
using ContinuousVectorFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;
using ContinuousMatrixFn =
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)>;
using ContinuousWeightedHessianFn = std::function<Eigen::MatrixXd(
    const Eigen::VectorXd&, double, const Eigen::VectorXd&)>;

// Controlled system in an adapted basis. Each column of actuated(q) and
// unactuated(q) is a section (X, chi) stacked as an (n + 3)-vector.
struct ControlledSystem {
  int n = 0;
  GroupTag tag = GroupTag::kSE2;
  int controls = 0;
  // Reduced Lagrangian l(q, qdot, xi), used when dynamics is absent.
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, const Vec3&)>
      lagrangian;
  // Optional closed form of the left-hand sides [E_M; E_G] on a state s.
  ContinuousVectorFn dynamics;
  // Cost C(q, qdot, xi, u) with q, qdot, xi read from s.
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&, double)> cost;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> actuated;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> unactuated;
  // Configurations at which the basis rank is checked.
  std::vector<Eigen::VectorXd> rank_samples;
};

// E_M = d/dt dl/dqdot - dl/dq and E_G = d/dt dl/dxi - ad*_xi dl/dxi by nested
// central differences of the Lagrangian.
Eigen::VectorXd euler_poincare_operator(const ControlledSystem& sys,
                                        const Eigen::VectorXd& s);

struct ReducedCallbacks {
  int m = 0;
  ContinuousScalarFn ltilde;
  ContinuousVectorFn phi;
  // F_a, the actuated projections (controls as functions of the state).
  ContinuousVectorFn controls;
};

// Throws IllPosedBasisError if [actuated | unactuated] is not square and
// invertible at every rank sample.
ReducedCallbacks reduce_to_variational(const ControlledSystem& sys);

enum class BoundaryConvention {
  // q_k and g_k at t = kh, T = Nh.
  kNodal,
  // q_k and g_k at t = (k - 1/2) h, xi_k at t = kh, T = (N - 1) h.
  kStaggered,
};

const char* convention_name(BoundaryConvention c);

struct BoundaryData {
  Eigen::VectorXd q0, qd0, qT, qdT;
  Vec3 xi0 = Vec3::Zero();
  Vec3 xiT = Vec3::Zero();
  GroupElement g0;
  GroupElement gT;
};

struct SecondOrderProblem {
  std::string name;
  int n = 0;
  int m = 0;
  GroupTag tag = GroupTag::kSE2;
  ContinuousScalarFn ltilde;
  ContinuousVectorFn ltilde_grad;  // optional
  ContinuousMatrixFn ltilde_hess;  // optional
  ContinuousVectorFn phi;
  ContinuousMatrixFn phi_jac;                       // optional, m x (3n + 6)
  ContinuousWeightedHessianFn phi_weighted_hess;    // optional
  BoundaryData boundary;
  int N = 10;
  double h = 0.1;
  double t0 = 0.0;
  BoundaryConvention convention = BoundaryConvention::kNodal;
  Trivialization trivialization = Trivialization::kLeft;
  std::string retraction = "cayley";

  double final_time() const;
  // Time of the stencil centre of window i.
  double window_time(int i) const;
  void validate() const;
};

// Maps a window [q_i, q_{i+1}, q_{i+2}, xi_i, xi_{i+1}] to the averaged state.
Eigen::MatrixXd stencil_matrix(int n, double h);

struct DiscreteProblem {
  DiscreteLagrangian ld;
  DiscreteConstraintSet phi;
};

// L_d = h Ltilde(S z, t) and Phi_d = Phi(S z, t) at the window centre time.
DiscreteProblem discretize(const SecondOrderProblem& prob);

struct OcpLayout {
  int q_offset = 0, q_count = 0;
  int xi_offset = 0, xi_count = 0;
  int lambda_offset = 0, lambda_count = 0;

  int size() const { return lambda_offset + lambda_count; }
};

struct OcpRows {
  int m_offset = 0, m_count = 0;
  int g_offset = 0, g_count = 0;
  int closure_offset = 0, closure_count = 0;
  int c_offset = 0, c_count = 0;

  int size() const { return c_offset + c_count; }
};

struct OcpResidual {
  DlpResidual dlp;
  Vec3 closure = Vec3::Zero();

  // [M rows | group rows | closure | constraints]
  Eigen::VectorXd flat() const;
};

class OcpSystem {
 public:
  explicit OcpSystem(SecondOrderProblem prob);

  const SecondOrderProblem& problem() const { return prob_; }
  const DiscreteProblem& discrete() const { return disc_; }
  const Retraction& retraction() const { return r_; }
  const OcpLayout& layout() const { return layout_; }
  const OcpRows& rows() const { return rows_; }
  int unknown_count() const { return layout_.size(); }
  int equation_count() const { return rows_.size(); }

  // Group endpoints after the boundary convention is applied.
  const GroupElement& g_start() const { return g_start_; }
  const GroupElement& g_target() const { return g_target_; }

  // Path with boundary nodes and increments filled in, zero elsewhere.
  DiscretePath boundary_path() const;
  Eigen::VectorXd assemble(const DiscretePath& path) const;
  // Fixed nodes are injected from boundary data; g is reconstructed.
  DiscretePath scatter(const Eigen::VectorXd& x) const;
  Eigen::VectorXd initial_guess() const;

  OcpResidual evaluate(const DiscretePath& path) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  // Assembled stationarity and constraint blocks against the central
  // difference gradient of the augmented action.
  OracleReport oracle(const Eigen::VectorXd& x, double eps = 1e-5) const;

  // Sum of L_d over all windows.
  double discrete_cost(const DiscretePath& path) const;

  std::vector<GroupElement> reconstruct(const DiscretePath& path) const;

 private:
  int q_col(int node) const;
  int xi_col(int index) const;

  SecondOrderProblem prob_;
  DiscreteProblem disc_;
  Retraction r_;
  OcpLayout layout_;
  OcpRows rows_;
  GroupElement g_start_;
  GroupElement g_target_;
  std::vector<Eigen::VectorXd> q_fixed_;  // q_0, q_1, q_{N-1}, q_N
};

}  // namespace lpvi
