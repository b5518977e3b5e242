#include "lpvi/lie.h"

#include <cmath>
#include <string>

namespace lpvi {

const char* group_name(GroupTag tag) {
  return tag == GroupTag::kSE2 ? "SE2" : "SO3";
}

void check_same_tag(GroupTag a, GroupTag b, const char* where) {
  if (a != b) {
    throw TagMismatchError(std::string(where) + ": group tags differ (" +
                           group_name(a) + " vs " + group_name(b) + ")");
  }
}

double pairing(const CovectorAlg& mu, const AlgebraVector& xi) {
  check_same_tag(mu.tag, xi.tag, "pairing");
  return mu.coords.dot(xi.coords);
}

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  check_same_tag(a.tag, b.tag, "compose");
  GroupElement out{a.matrix * b.matrix, a.tag};
  if (out.tag == GroupTag::kSE2) out.matrix.row(2) << 0.0, 0.0, 1.0;
  return out;
}

GroupElement inverse(const GroupElement& g) {
  GroupElement out{Mat3::Identity(), g.tag};
  if (g.tag == GroupTag::kSO3) {
    out.matrix = g.matrix.transpose();
  } else {
    const Eigen::Matrix2d rt = g.matrix.topLeftCorner<2, 2>().transpose();
    out.matrix.topLeftCorner<2, 2>() = rt;
    out.matrix.topRightCorner<2, 1>() = -rt * g.matrix.topRightCorner<2, 1>();
  }
  return out;
}

double invariant_defect(const GroupElement& g) {
  if (g.tag == GroupTag::kSO3) {
    const Mat3& r = g.matrix;
    return (r.transpose() * r - Mat3::Identity()).norm() +
           std::abs(r.determinant() - 1.0);
  }
  const Eigen::Matrix2d r = g.matrix.topLeftCorner<2, 2>();
  const double bottom = std::abs(g.matrix(2, 0)) + std::abs(g.matrix(2, 1)) +
                        std::abs(g.matrix(2, 2) - 1.0);
  return (r.transpose() * r - Eigen::Matrix2d::Identity()).norm() +
         std::abs(r.determinant() - 1.0) + bottom;
}

bool is_valid(const GroupElement& g, double tol) {
  return invariant_defect(g) <= tol;
}

GroupElement reproject(const GroupElement& g) {
  GroupElement out = g;
  if (g.tag == GroupTag::kSO3) {
    Eigen::JacobiSVD<Mat3> svd(g.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
      Mat3 u = svd.matrixU();
      u.col(2) *= -1.0;
      r = u * svd.matrixV().transpose();
    }
    out.matrix = r;
  } else {
    // Nearest rotation to a 2x2 block is the normalized (c, s) of its
    // rotation-like part.
    const Eigen::Matrix2d m = g.matrix.topLeftCorner<2, 2>();
    const double c = 0.5 * (m(0, 0) + m(1, 1));
    const double s = 0.5 * (m(1, 0) - m(0, 1));
    const double n = std::hypot(c, s);
    out.matrix.topLeftCorner<2, 2>() << c / n, -s / n, s / n, c / n;
    out.matrix.row(2) << 0.0, 0.0, 1.0;
  }
  return out;
}

GroupElement maybe_reproject(const GroupElement& g) {
  return invariant_defect(g) > 1e-9 ? reproject(g) : g;
}

Mat3 hat(GroupTag tag, const Vec3& v) {
  Mat3 x;
  if (tag == GroupTag::kSO3) {
    x << 0.0, -v(2), v(1),
         v(2), 0.0, -v(0),
         -v(1), v(0), 0.0;
  } else {
    x << 0.0, -v(0), v(1),
         v(0), 0.0, v(2),
         0.0, 0.0, 0.0;
  }
  return x;
}

Vec3 vee(GroupTag tag, const Mat3& x, double tol) {
  if (tag == GroupTag::kSO3) {
    if ((x + x.transpose()).cwiseAbs().maxCoeff() > tol) {
      throw ShapeError("vee: matrix is not antisymmetric");
    }
    return Vec3(0.5 * (x(2, 1) - x(1, 2)), 0.5 * (x(0, 2) - x(2, 0)),
                0.5 * (x(1, 0) - x(0, 1)));
  }
  if (x.row(2).cwiseAbs().maxCoeff() > tol || std::abs(x(0, 0)) > tol ||
      std::abs(x(1, 1)) > tol || std::abs(x(0, 1) + x(1, 0)) > tol) {
    throw ShapeError("vee: matrix is not in se(2)");
  }
  return Vec3(0.5 * (x(1, 0) - x(0, 1)), x(0, 2), x(1, 2));
}

Mat3 hat(const AlgebraVector& v) { return hat(v.tag, v.coords); }

AlgebraVector vee_algebra(GroupTag tag, const Mat3& x) {
  return {vee(tag, x), tag};
}

Mat3 ad_matrix(GroupTag tag, const Vec3& v) {
  if (tag == GroupTag::kSO3) return hat(GroupTag::kSO3, v);
  Mat3 a;
  a << 0.0, 0.0, 0.0,
       v(2), 0.0, -v(0),
       -v(1), v(0), 0.0;
  return a;
}

Mat3 Ad_matrix(const GroupElement& g) {
  if (g.tag == GroupTag::kSO3) return g.matrix;
  const double px = g.matrix(0, 2);
  const double py = g.matrix(1, 2);
  Mat3 a;
  a << 1.0, 0.0, 0.0,
       py, g.matrix(0, 0), g.matrix(0, 1),
       -px, g.matrix(1, 0), g.matrix(1, 1);
  return a;
}

Vec3 bracket(GroupTag tag, const Vec3& a, const Vec3& b) {
  return ad_matrix(tag, a) * b;
}

CovectorAlg ad_star(const AlgebraVector& xi, const CovectorAlg& mu) {
  check_same_tag(xi.tag, mu.tag, "ad_star");
  return {ad_matrix(xi.tag, xi.coords).transpose() * mu.coords, mu.tag};
}

CovectorAlg Ad_star(const GroupElement& g, const CovectorAlg& mu) {
  check_same_tag(g.tag, mu.tag, "Ad_star");
  return {Ad_matrix(g).transpose() * mu.coords, mu.tag};
}

CotangentCovector pullback_left(const GroupElement& g,
                                const CotangentCovector& alpha) {
  check_same_tag(g.tag, alpha.tag, "pullback_left");
  return {g.matrix.transpose() * alpha.ambient, g.tag};
}

CotangentCovector pullback_right(const GroupElement& g,
                                 const CotangentCovector& alpha) {
  check_same_tag(g.tag, alpha.tag, "pullback_right");
  return {alpha.ambient * g.matrix.transpose(), g.tag};
}

namespace {

CovectorAlg trivialize_at_identity(const Mat3& a, GroupTag tag) {
  CovectorAlg out{Vec3::Zero(), tag};
  for (int j = 0; j < 3; ++j) {
    out.coords(j) = (a.array() * hat(tag, Vec3::Unit(j)).array()).sum();
  }
  return out;
}

}  // namespace

CovectorAlg ell_star(const GroupElement& g, const CotangentCovector& alpha) {
  return trivialize_at_identity(pullback_left(g, alpha).ambient, g.tag);
}

CovectorAlg r_star(const GroupElement& g, const CotangentCovector& alpha) {
  return trivialize_at_identity(pullback_right(g, alpha).ambient, g.tag);
}

GroupElement se2(double theta, double x, double y) {
  GroupElement g{Mat3::Identity(), GroupTag::kSE2};
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  g.matrix << c, -s, x,
              s, c, y,
              0.0, 0.0, 1.0;
  return g;
}

GroupElement so3_rotation(const Vec3& axis, double angle) {
  const Vec3 n = axis.normalized();
  return {Eigen::AngleAxisd(angle, n).toRotationMatrix(), GroupTag::kSO3};
}

}  // namespace lpvi
