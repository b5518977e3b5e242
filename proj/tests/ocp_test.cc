#include "lpvi/ocp.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lpvi/errors.h"
#include "lpvi/solver.h"

namespace lpvi {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Smooth nonlinear cost and two time-dependent constraints on n = 1.
SecondOrderProblem synthetic_problem(GroupTag tag, int big_n, int m, Trivialization t) {
  SecondOrderProblem p;
  p.name = "synthetic";
  p.n = 1;
  p.m = m;
  p.tag = tag;
  p.ltilde = [](const VectorXd& s, double) {
    const double q = s(0), qd = s(1), qdd = s(2);
    const Vec3 xi = s.segment<3>(3), xid = s.segment<3>(6);
    return 0.5 * qdd * qdd + 0.5 * xid.squaredNorm() + 0.1 * std::cos(q) * xi.squaredNorm() +
           0.2 * qd * xi(0) * xi(2);
  };
  p.phi = [](const VectorXd& s, double time) -> VectorXd {
    const double q = s(0), qd = s(1), qdd = s(2);
    const Vec3 xi = s.segment<3>(3), xid = s.segment<3>(6);
    VectorXd v(2);
    v << xid(0) - 0.3 * std::sin(q) * xi(1) - 0.2 * qd * xi(2),
        xid(1) + 0.5 * qdd - 0.1 * time * xi(0) + 0.3 * xi(0) * xi(2);
    return v.head(2);
  };
  p.ltilde_grad = [](const VectorXd& s, double) -> VectorXd {
    const double q = s(0), qd = s(1), qdd = s(2);
    const Vec3 xi = s.segment<3>(3), xid = s.segment<3>(6);
    VectorXd g = VectorXd::Zero(9);
    g(0) = -0.1 * std::sin(q) * xi.squaredNorm();
    g(1) = 0.2 * xi(0) * xi(2);
    g(2) = qdd;
    g.segment<3>(3) = 0.2 * std::cos(q) * xi;
    g(3) += 0.2 * qd * xi(2);
    g(5) += 0.2 * qd * xi(0);
    g.segment<3>(6) = xid;
    return g;
  };
  p.phi_jac = [](const VectorXd& s, double time) -> MatrixXd {
    const double q = s(0), qd = s(1);
    const Vec3 xi = s.segment<3>(3);
    MatrixXd j = MatrixXd::Zero(2, 9);
    j(0, 0) = -0.3 * std::cos(q) * xi(1);
    j(0, 1) = -0.2 * xi(2);
    j(0, 4) = -0.3 * std::sin(q);
    j(0, 5) = -0.2 * qd;
    j(0, 6) = 1.0;
    j(1, 2) = 0.5;
    j(1, 3) = -0.1 * time + 0.3 * xi(2);
    j(1, 5) = 0.3 * xi(0);
    j(1, 7) = 1.0;
    return j;
  };
  if (m == 1) {
    auto full_jac = p.phi_jac;
    p.phi_jac = [full_jac](const VectorXd& s, double time) -> MatrixXd {
      return full_jac(s, time).topRows(1);
    };
    auto full = p.phi;
    p.phi = [full](const VectorXd& s, double time) -> VectorXd {
      return full(s, time).head(1);
    };
  }
  p.N = big_n;
  p.h = 0.1;
  p.t0 = 0.3;
  p.trivialization = t;
  BoundaryData& b = p.boundary;
  b.q0 = VectorXd::Constant(1, 0.2);
  b.qd0 = VectorXd::Constant(1, -0.1);
  b.qT = VectorXd::Constant(1, 0.7);
  b.qdT = VectorXd::Constant(1, 0.3);
  b.xi0 = Vec3(0.1, 0.2, -0.1);
  b.xiT = Vec3(-0.2, 0.1, 0.3);
  if (tag == GroupTag::kSE2) {
    b.g0 = se2(0.1, 0.0, 0.2);
    b.gT = se2(0.5, 0.4, 0.1);
  } else {
    b.g0 = so3_rotation(Vec3(0, 0, 1), 0.1);
    b.gT = so3_rotation(Vec3(1, 1, 0), 0.4);
  }
  return p;
}

VectorXd random_point(const OcpSystem& sys, unsigned seed, double scale = 0.3) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorXd x = sys.initial_guess();
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += scale * u(rng);
  return x;
}

TEST(Counting, Se2TenSteps) {
  SecondOrderProblem p = synthetic_problem(GroupTag::kSE2, 10, 2, Trivialization::kLeft);
  const OcpSystem sys(p);
  EXPECT_EQ(sys.layout().q_count, 7);
  EXPECT_EQ(sys.layout().xi_count, 24);
  EXPECT_EQ(sys.layout().lambda_count, 18);
  EXPECT_EQ(sys.unknown_count(), 49);
  EXPECT_EQ(sys.rows().m_count, 7);
  EXPECT_EQ(sys.rows().g_count, 21);
  EXPECT_EQ(sys.rows().closure_count, 3);
  EXPECT_EQ(sys.rows().c_count, 18);
  EXPECT_EQ(sys.equation_count(), 49);
  EXPECT_EQ(sys.residual(sys.initial_guess()).size(), 49);
}

TEST(Counting, ClosesForAllSizes) {
  for (int big_n : {6, 7, 10, 20, 50}) {
    for (int m : {0, 1, 2}) {
      const OcpSystem sys(synthetic_problem(GroupTag::kSO3, big_n, m, Trivialization::kLeft));
      EXPECT_EQ(sys.unknown_count(), (big_n - 3) + 3 * (big_n - 2) + m * (big_n - 1));
      EXPECT_EQ(sys.equation_count(), (big_n - 3) + 3 * (big_n - 3) + 3 + m * (big_n - 1));
    }
  }
  EXPECT_THROW(OcpSystem(synthetic_problem(GroupTag::kSE2, 5, 2, Trivialization::kLeft)),
               ConfigError);
}

TEST(Layout, RoundTripIsExact) {
  const OcpSystem sys(synthetic_problem(GroupTag::kSE2, 9, 2, Trivialization::kLeft));
  const VectorXd x = random_point(sys, 3);
  EXPECT_EQ(sys.assemble(sys.scatter(x)), x);
  const DiscretePath p = sys.scatter(x);
  EXPECT_EQ(p.q[1], sys.boundary_path().q[1]);
  EXPECT_EQ(p.xi[0], sys.problem().boundary.xi0);
  EXPECT_EQ(p.xi[8], sys.problem().boundary.xiT);
  EXPECT_THROW(sys.scatter(VectorXd::Zero(3)), SizeError);
}

TEST(Stencil, ConstantAndQuadratic) {
  const int n = 2;
  const double h = 0.05;
  const MatrixXd s = stencil_matrix(n, h);
  const StateLayout lay{n};
  VectorXd z(3 * n + 6);
  z << 1.5, -2, 1.5, -2, 1.5, -2, 0, 0, 0, 0, 0, 0;
  const VectorXd c = s * z;
  EXPECT_EQ(c.segment(lay.qdd(), n).norm(), 0.0);
  EXPECT_EQ(c.segment(lay.xid(), 3).norm(), 0.0);
  EXPECT_NEAR(c(lay.q()), 1.5, 1e-15);
  // gamma_k = (k h)^2 with k = 3, 4, 5.
  const double hq = 0.125;
  const MatrixXd s1 = stencil_matrix(1, hq);
  VectorXd zq = VectorXd::Zero(9);
  for (int j = 0; j < 3; ++j) zq(j) = std::pow((3 + j) * hq, 2);
  EXPECT_EQ((s1 * zq)(StateLayout{1}.qdd()), 2.0);
}

TEST(Stencil, SecondOrderAccurate) {
  std::vector<double> err;
  for (double h : {0.1, 0.05, 0.025}) {
    const MatrixXd s = stencil_matrix(1, h);
    double worst = 0.0;
    for (int k = 0; k + 2 <= static_cast<int>(1.0 / h); ++k) {
      VectorXd z = VectorXd::Zero(9);
      for (int j = 0; j < 3; ++j) z(j) = std::sin(2.0 * (k + j) * h);
      const double exact = -4.0 * std::sin(2.0 * (k + 1) * h);
      worst = std::max(worst, std::abs((s * z)(2) - exact));
    }
    err.push_back(worst);
  }
  const double slope = std::log(err[0] / err[2]) / std::log(4.0);
  EXPECT_NEAR(slope, 2.0, 0.1);
}

struct OracleCase {
  GroupTag tag;
  Trivialization t;
};

class OcpOracle : public ::testing::TestWithParam<OracleCase> {};

TEST_P(OcpOracle, ResidualIsActionGradient) {
  const OracleCase c = GetParam();
  const OcpSystem sys(synthetic_problem(c.tag, 7, 2, c.t));
  const VectorXd x = random_point(sys, 11);
  const OracleReport rep = sys.oracle(x);
  EXPECT_LE(rep.max(), 1e-6) << rep.worst_block();
}

TEST_P(OcpOracle, AnalyticJacobianMatchesDifferences) {
  const OracleCase c = GetParam();
  const OcpSystem sys(synthetic_problem(c.tag, 8, 2, c.t));
  const VectorXd x = random_point(sys, 5);
  const MatrixXd a = sys.jacobian(x);
  const MatrixXd f =
      fd_jacobian([&](const VectorXd& v) { return sys.residual(v); }, x, 1e-6);
  EXPECT_LE((a - f).cwiseAbs().maxCoeff(), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(
    Groups, OcpOracle,
    ::testing::Values(OracleCase{GroupTag::kSE2, Trivialization::kLeft},
                      OracleCase{GroupTag::kSE2, Trivialization::kRight},
                      OracleCase{GroupTag::kSO3, Trivialization::kLeft},
                      OracleCase{GroupTag::kSO3, Trivialization::kRight}));

TEST(Residual, BoundaryNodeOnlyTouchesItsStencil) {
  const OcpSystem sys(synthetic_problem(GroupTag::kSE2, 10, 2, Trivialization::kLeft));
  const DiscretePath base = sys.scatter(random_point(sys, 8));
  DiscretePath moved = base;
  moved.q[0](0) += 0.37;
  const OcpResidual a = sys.evaluate(base);
  const OcpResidual b = sys.evaluate(moved);
  // Window 0 reaches stationarity node 2 only.
  EXPECT_NE(a.dlp.m_part[0], b.dlp.m_part[0]);
  for (size_t i = 1; i < a.dlp.m_part.size(); ++i) {
    EXPECT_EQ(a.dlp.m_part[i], b.dlp.m_part[i]);
    EXPECT_EQ(a.dlp.g_part[i], b.dlp.g_part[i]);
  }
  for (size_t w = 1; w < a.dlp.constraints.size(); ++w) {
    EXPECT_EQ(a.dlp.constraints[w], b.dlp.constraints[w]);
  }
  EXPECT_EQ(a.closure, b.closure);
}

TEST(Reconstruct, ZeroAndQuarterTurns) {
  const Retraction r = Retraction::cayley(GroupTag::kSO3);
  const GroupElement g0 = so3_rotation(Vec3(0, 1, 0), 0.3);
  const auto still = reconstruct_path(g0, std::vector<Vec3>(5, Vec3::Zero()), 0.1, r,
                                      Trivialization::kLeft);
  for (const auto& g : still) EXPECT_EQ(g.matrix, g0.matrix);
  const double h = 0.25;
  const auto turn = reconstruct_path(GroupElement::identity(GroupTag::kSO3),
                                     std::vector<Vec3>(4, Vec3(2.0 / h, 0, 0)), h, r,
                                     Trivialization::kLeft);
  for (int k = 0; k <= 4; ++k) {
    const Mat3 want = so3_rotation(Vec3(1, 0, 0), k * M_PI / 2).matrix;
    EXPECT_LT((turn[k].matrix - want).norm(), 1e-12) << k;
  }
}

TEST(Solve, SyntheticProblemMeetsTarget) {
  for (auto t : {Trivialization::kLeft, Trivialization::kRight}) {
    for (auto conv : {BoundaryConvention::kNodal, BoundaryConvention::kStaggered}) {
      SecondOrderProblem p = synthetic_problem(GroupTag::kSO3, 12, 1, t);
      p.convention = conv;
      const OcpSystem sys(p);
      SolverConfig cfg;
      cfg.jacobian_mode = JacobianMode::kModelSupplied;
      const SolveResult res = solve([&](const VectorXd& x) { return sys.residual(x); },
                                    sys.initial_guess(), cfg,
                                    [&](const VectorXd& x) { return sys.jacobian(x); });
      ASSERT_TRUE(res.converged) << res.message;
      const DiscretePath path = sys.scatter(res.x);
      EXPECT_LT((path.g.back().matrix - sys.g_target().matrix).cwiseAbs().maxCoeff(), 1e-8);
      for (const auto& c : sys.evaluate(path).dlp.constraints) {
        EXPECT_LT(c.cwiseAbs().maxCoeff(), 1e-8);
      }
    }
  }
}

TEST(Problem, Validation) {
  SecondOrderProblem p = synthetic_problem(GroupTag::kSE2, 8, 2, Trivialization::kLeft);
  p.h = 0.0;
  EXPECT_THROW(OcpSystem{p}, ConfigError);
  p = synthetic_problem(GroupTag::kSE2, 8, 2, Trivialization::kLeft);
  p.boundary.gT = so3_rotation(Vec3(0, 0, 1), 0.2);
  EXPECT_THROW(OcpSystem{p}, TagMismatchError);
  p = synthetic_problem(GroupTag::kSE2, 8, 2, Trivialization::kLeft);
  p.boundary.q0 = VectorXd::Zero(2);
  EXPECT_THROW(OcpSystem{p}, SizeError);
}

// Toy system on R x SE(2): a double integrator in q with one actuated
// direction and the rest unactuated.
ControlledSystem toy_system() {
  ControlledSystem sys;
  sys.n = 1;
  sys.tag = GroupTag::kSE2;
  sys.controls = 1;
  sys.lagrangian = [](const VectorXd& q, const VectorXd& qd, const Vec3& xi) {
    return 0.5 * qd.squaredNorm() + 0.5 * xi.squaredNorm() + 0.1 * q(0) * xi(0);
  };
  sys.cost = [](const VectorXd&, const VectorXd& u, double) { return u.squaredNorm(); };
  sys.actuated = [](const VectorXd& q) -> MatrixXd {
    MatrixXd a = MatrixXd::Zero(4, 1);
    a(0, 0) = 1.0;
    a(1, 0) = std::sin(q(0));
    return a;
  };
  sys.unactuated = [](const VectorXd&) -> MatrixXd {
    MatrixXd u = MatrixXd::Zero(4, 3);
    u(1, 0) = u(2, 1) = u(3, 2) = 1.0;
    return u;
  };
  sys.rank_samples = {VectorXd::Constant(1, 0.0), VectorXd::Constant(1, 1.0)};
  return sys;
}

TEST(Reduce, RankDeficientBasisIsRejected) {
  ControlledSystem sys = toy_system();
  sys.unactuated = [](const VectorXd&) -> MatrixXd {
    MatrixXd u = MatrixXd::Zero(4, 3);
    u(0, 0) = u(2, 1) = u(3, 2) = 1.0;  // duplicates the actuated q direction
    return u;
  };
  EXPECT_THROW(reduce_to_variational(sys), IllPosedBasisError);
}

TEST(Reduce, EulerPoincareOperatorAgainstClosedForm) {
  const ControlledSystem sys = toy_system();
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd s(9);
    for (int i = 0; i < 9; ++i) s(i) = u(rng);
    // l = qd^2/2 + |xi|^2/2 + 0.1 q xi_1.
    VectorXd want(4);
    want(0) = s(2) - 0.1 * s(3);
    const Vec3 xi = s.segment<3>(3);
    Vec3 mom = xi;
    mom(0) += 0.1 * s(0);
    Vec3 dmom = s.segment<3>(6);
    dmom(0) += 0.1 * s(1);
    want.tail<3>() = dmom - ad_matrix(GroupTag::kSE2, xi).transpose() * mom;
    EXPECT_LT((euler_poincare_operator(sys, s) - want).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Reduce, UnforcedMotionHasZeroConstraintsAndCost) {
  const ControlledSystem sys = toy_system();
  const ReducedCallbacks red = reduce_to_variational(sys);
  EXPECT_EQ(red.m, 3);
  // Rest is an unforced motion.
  VectorXd s = VectorXd::Zero(9);
  EXPECT_LT(red.phi(s, 0.0).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(red.ltilde(s, 0.0), 0.0, 1e-12);
  s(2) = 0.5;
  EXPECT_GT(red.ltilde(s, 0.0), 0.0);
}

}  // namespace
}  // namespace lpvi
