#include "lpvi/lie.h"

#include <random>

#include <gtest/gtest.h>

#include "lpvi/retraction.h"

namespace lpvi {
namespace {

Vec3 random_vec(std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

GroupElement random_element(GroupTag tag, std::mt19937& rng) {
  return Retraction::cayley(tag).tau(random_vec(rng, 1.5));
}

TEST(Compose, IdentityAndInverse) {
  std::mt19937 rng(1);
  for (GroupTag tag : {GroupTag::kSE2, GroupTag::kSO3}) {
    const GroupElement g = random_element(tag, rng);
    EXPECT_TRUE(compose(GroupElement::identity(tag), g).matrix.isApprox(g.matrix));
    EXPECT_LT((compose(g, inverse(g)).matrix - Mat3::Identity()).norm(), 1e-12);
    EXPECT_TRUE(is_valid(compose(g, g)));
  }
}

TEST(Compose, Se2QuarterTurns) {
  const GroupElement r = compose(se2(M_PI / 2, 0, 0), se2(M_PI / 2, 0, 0));
  Mat3 expected;
  expected << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  EXPECT_LT((r.matrix - expected).norm(), 1e-15);
}

TEST(Compose, TagMismatch) {
  EXPECT_THROW(compose(GroupElement::identity(GroupTag::kSE2),
                       GroupElement::identity(GroupTag::kSO3)),
               TagMismatchError);
}

TEST(Inverse, ClosedForms) {
  const GroupElement rx = so3_rotation(Vec3::UnitX(), 0.3);
  EXPECT_LT((inverse(rx).matrix - so3_rotation(Vec3::UnitX(), -0.3).matrix).norm(),
            1e-15);
  const GroupElement t = inverse(se2(0.0, 1.0, 2.0));
  EXPECT_DOUBLE_EQ(t.matrix(0, 2), -1.0);
  EXPECT_DOUBLE_EQ(t.matrix(1, 2), -2.0);
  EXPECT_EQ(inverse(GroupElement::identity(GroupTag::kSO3)).matrix, Mat3::Identity());
}

TEST(HatVee, Se2Layout) {
  Mat3 expected;
  expected << 0, -1.5, 2, 1.5, 0, -3, 0, 0, 0;
  EXPECT_EQ(hat(GroupTag::kSE2, Vec3(1.5, 2, -3)), expected);
}

TEST(HatVee, So3BasisAndRoundTrip) {
  Mat3 e1;
  e1 << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_EQ(hat(GroupTag::kSO3, Vec3::UnitX()), e1);
  for (GroupTag tag : {GroupTag::kSE2, GroupTag::kSO3}) {
    const Vec3 v(2, -1, 3);
    EXPECT_EQ(vee(tag, hat(tag, v)), v);
    const Vec3 u(0.5, 0.25, -4);
    EXPECT_EQ(hat(tag, 2.0 * u - 3.0 * v), 2.0 * hat(tag, u) - 3.0 * hat(tag, v));
  }
}

TEST(HatVee, RejectsOutsideImage) {
  Mat3 x = Mat3::Identity();
  EXPECT_THROW(vee(GroupTag::kSO3, x), ShapeError);
  Mat3 y = hat(GroupTag::kSE2, Vec3(1, 2, 3));
  y(2, 0) = 1.0;
  EXPECT_THROW(vee(GroupTag::kSE2, y), ShapeError);
}

TEST(Bracket, Se2TableAndStructureConstants) {
  const GroupTag t = GroupTag::kSE2;
  const Vec3 e1 = Vec3::UnitX(), e2 = Vec3::UnitY(), e3 = Vec3::UnitZ();
  EXPECT_EQ(bracket(t, e1, e2), e3);
  EXPECT_EQ(bracket(t, e1, e3), -e2);
  EXPECT_EQ(bracket(t, e2, e3), Vec3::Zero());
  // C^k_ij = k-th coordinate of [e_i, e_j] under the bracket table.
  auto c = [&](int k, int i, int j) {
    return bracket(t, Vec3::Unit(i - 1), Vec3::Unit(j - 1))(k - 1);
  };
  EXPECT_EQ(c(3, 1, 2), 1.0);
  EXPECT_EQ(c(2, 1, 3), -1.0);
  // The published constants C^2_31 = C^1_23 = -1, C^2_13 = C^1_32 = 1 list
  // the rotation generator as index 3; relabel 1 <-> 3 to compare.
  auto relabel = [](int i) { return i == 1 ? 3 : (i == 3 ? 1 : i); };
  auto published = [&](int k, int i, int j) {
    return c(relabel(k), relabel(i), relabel(j));
  };
  EXPECT_EQ(published(2, 3, 1), -1.0);
  EXPECT_EQ(published(1, 2, 3), -1.0);
  EXPECT_EQ(published(2, 1, 3), 1.0);
  EXPECT_EQ(published(1, 3, 2), 1.0);
  int nonzero = 0;
  for (int k = 1; k <= 3; ++k)
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) nonzero += published(k, i, j) != 0.0;
  EXPECT_EQ(nonzero, 4);
}

TEST(Bracket, MatchesMatrixCommutatorAndJacobi) {
  std::mt19937 rng(2);
  for (GroupTag tag : {GroupTag::kSE2, GroupTag::kSO3}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vec3 a = random_vec(rng), b = random_vec(rng), c = random_vec(rng);
      const Mat3 comm = hat(tag, a) * hat(tag, b) - hat(tag, b) * hat(tag, a);
      EXPECT_LT((bracket(tag, a, b) - vee(tag, comm)).norm(), 1e-14);
      const Vec3 jac = bracket(tag, a, bracket(tag, b, c)) +
                       bracket(tag, b, bracket(tag, c, a)) +
                       bracket(tag, c, bracket(tag, a, b));
      EXPECT_LT(jac.norm(), 1e-14);
    }
  }
}

TEST(AdStar, ZeroAndPairing) {
  std::mt19937 rng(3);
  for (GroupTag tag : {GroupTag::kSE2, GroupTag::kSO3}) {
    const CovectorAlg mu{random_vec(rng), tag};
    EXPECT_EQ(ad_star({Vec3::Zero(), tag}, mu).coords, Vec3::Zero());
    for (int trial = 0; trial < 100; ++trial) {
      const AlgebraVector xi{random_vec(rng), tag};
      const AlgebraVector eta{random_vec(rng), tag};
      const CovectorAlg m{random_vec(rng), tag};
      const Mat3 comm = hat(xi) * hat(eta) - hat(eta) * hat(xi);
      const double lhs = pairing(ad_star(xi, m), eta);
      const double rhs = m.coords.dot(vee(tag, comm));
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
  }
}

TEST(AdStar, So3CrossProductExample) {
  const GroupTag t = GroupTag::kSO3;
  const CovectorAlg r = ad_star({Vec3::UnitX(), t}, {Vec3::UnitY(), t});
  EXPECT_DOUBLE_EQ(r.coords.dot(Vec3::UnitZ()),
                   Vec3::UnitY().dot(Vec3::UnitX().cross(Vec3::UnitZ())));
  EXPECT_DOUBLE_EQ(r.coords.dot(Vec3::UnitZ()), -1.0);
  // Coordinate form -w x mu.
  EXPECT_LT((r.coords + Vec3::UnitX().cross(Vec3::UnitY())).norm(), 1e-15);
}

TEST(AdStarGroup, IdentityGroupPropertyAndConjugationOracle) {
  std::mt19937 rng(4);
  for (GroupTag tag : {GroupTag::kSE2, GroupTag::kSO3}) {
    const CovectorAlg mu{random_vec(rng), tag};
    EXPECT_EQ(Ad_star(GroupElement::identity(tag), mu).coords, mu.coords);
    for (int trial = 0; trial < 100; ++trial) {
      const GroupElement g = random_element(tag, rng);
      const CovectorAlg m{random_vec(rng), tag};
      const CovectorAlg back = Ad_star(g, Ad_star(inverse(g), m));
      EXPECT_LT((back.coords - m.coords).norm(), 1e-12);
      // Ad matrix built column by column from conjugated basis elements.
      Mat3 oracle;
      for (int j = 0; j < 3; ++j) {
        oracle.col(j) =
            vee(tag, g.matrix * hat(tag, Vec3::Unit(j)) * inverse(g).matrix);
      }
      EXPECT_LT((Ad_matrix(g) - oracle).norm(), 1e-12);
      const AlgebraVector eta{random_vec(rng), tag};
      EXPECT_NEAR(pairing(Ad_star(g, m), eta), m.coords.dot(oracle * eta.coords),
                  1e-12);
    }
  }
  const GroupElement rz = so3_rotation(Vec3::UnitZ(), M_PI / 2);
  const CovectorAlg r = Ad_star(rz, {Vec3::UnitX(), GroupTag::kSO3});
  EXPECT_LT((r.coords - Vec3(0, -1, 0)).norm(), 1e-15);
}

TEST(Pullbacks, IdentityAndInverse) {
  std::mt19937 rng(5);
  for (GroupTag tag : {GroupTag::kSE2, GroupTag::kSO3}) {
    CotangentCovector a{Mat3::Random(), tag};
    const GroupElement e = GroupElement::identity(tag);
    EXPECT_EQ(pullback_left(e, a).ambient, a.ambient);
    EXPECT_EQ(pullback_right(e, a).ambient, a.ambient);
    const GroupElement g = random_element(tag, rng);
    EXPECT_LT((pullback_left(inverse(g), pullback_left(g, a)).ambient - a.ambient)
                  .norm(),
              1e-12);
    EXPECT_LT((pullback_right(inverse(g), pullback_right(g, a)).ambient -
               a.ambient)
                  .norm(),
              1e-12);
  }
}

TEST(Pullbacks, TraceFunctionFiniteDifference) {
  std::mt19937 rng(6);
  for (GroupTag tag : {GroupTag::kSE2, GroupTag::kSO3}) {
    const Retraction r = Retraction::cayley(tag);
    const GroupElement g = random_element(tag, rng);
    // F(g) = trace(g) has ambient gradient I.
    const CotangentCovector dF{Mat3::Identity(), tag};
    const CovectorAlg left = ell_star(g, dF);
    const CovectorAlg right = r_star(g, dF);
    const double eps = 1e-5;
    for (int j = 0; j < 3; ++j) {
      const Vec3 eta = Vec3::Unit(j);
      const double fd_left = (compose(g, r.tau(eps * eta)).matrix.trace() -
                              compose(g, r.tau(-eps * eta)).matrix.trace()) /
                             (2 * eps);
      const double fd_right = (compose(r.tau(eps * eta), g).matrix.trace() -
                               compose(r.tau(-eps * eta), g).matrix.trace()) /
                              (2 * eps);
      EXPECT_NEAR(left.coords(j), fd_left, 1e-6);
      EXPECT_NEAR(right.coords(j), fd_right, 1e-6);
    }
  }
}

TEST(Reproject, RestoresOrthogonality) {
  GroupElement g = so3_rotation(Vec3(1, 2, 3), 0.7);
  g.matrix(0, 0) += 1e-6;
  EXPECT_GT(invariant_defect(g), 1e-9);
  EXPECT_LT(invariant_defect(maybe_reproject(g)), 1e-14);
  GroupElement h = se2(0.4, 1, 2);
  h.matrix(0, 1) += 1e-6;
  EXPECT_LT(invariant_defect(reproject(h)), 1e-14);
}

}  // namespace
}  // namespace lpvi
