#pragma once

// Matrix Lie group kernels for SE(2) and SO(3).
//
// SE(2) algebra coordinates are ordered (v1, v2, v3) with v1 the rotation
// rate and (v2, v3) the translation rates:
//
//   hat(v) = [[0, -v1, v2],
//             [v1,  0, v3],
//             [0,   0,  0]]
//
// This is not the common (x, y, theta) order. SO(3) coordinates are the
// usual (w1, w2, w3) with hat(w) the cross-product matrix.

#include <Eigen/Dense>

#include "lpvi/errors.h"

namespace lpvi {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class GroupTag { kSE2, kSO3 };

const char* group_name(GroupTag tag);

struct GroupElement {
  Mat3 matrix = Mat3::Identity();
  GroupTag tag = GroupTag::kSO3;

  static GroupElement identity(GroupTag tag) { return {Mat3::Identity(), tag}; }
};

struct AlgebraVector {
  Vec3 coords = Vec3::Zero();
  GroupTag tag = GroupTag::kSO3;
};

struct CovectorAlg {
  Vec3 coords = Vec3::Zero();
  GroupTag tag = GroupTag::kSO3;
};

// A covector at a group point g, stored as its ambient 3x3 gradient A so
// that alpha(V) = trace(A^T V) for a tangent matrix V at g.
struct CotangentCovector {
  Mat3 ambient = Mat3::Zero();
  GroupTag tag = GroupTag::kSO3;
};

double pairing(const CovectorAlg& mu, const AlgebraVector& xi);

GroupElement compose(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& g);

// Frobenius defect of the group invariants (orthogonality, det, SE(2) bottom
// row). Zero for an exact element.
double invariant_defect(const GroupElement& g);
bool is_valid(const GroupElement& g, double tol = 1e-10);

// Closed-form polar projection back onto the group; only the rotation block
// is touched.
GroupElement reproject(const GroupElement& g);
// Reprojects only when the orthogonality defect exceeds 1e-9.
GroupElement maybe_reproject(const GroupElement& g);

Mat3 hat(GroupTag tag, const Vec3& v);
Vec3 vee(GroupTag tag, const Mat3& x, double tol = 1e-10);
Mat3 hat(const AlgebraVector& v);
AlgebraVector vee_algebra(GroupTag tag, const Mat3& x);

// Matrix of ad_v acting on coordinates: ad_v w = vee([hat v, hat w]).
Mat3 ad_matrix(GroupTag tag, const Vec3& v);
// Matrix of Ad_g acting on coordinates: Ad_g w = vee(g hat(w) g^-1).
Mat3 Ad_matrix(const GroupElement& g);

Vec3 bracket(GroupTag tag, const Vec3& a, const Vec3& b);

CovectorAlg ad_star(const AlgebraVector& xi, const CovectorAlg& mu);
CovectorAlg Ad_star(const GroupElement& g, const CovectorAlg& mu);

// Pullbacks of a covector under left and right translation by g.
// (l_g)^* sends a covector at g x to one at x; (r_g)^* at x g to one at x.
CotangentCovector pullback_left(const GroupElement& g,
                                const CotangentCovector& alpha);
CotangentCovector pullback_right(const GroupElement& g,
                                 const CotangentCovector& alpha);

// Trivialized pullbacks to the identity: <ell_star(g, a), eta> = a(g hat(eta))
// and <r_star(g, a), eta> = a(hat(eta) g).
CovectorAlg ell_star(const GroupElement& g, const CotangentCovector& alpha);
CovectorAlg r_star(const GroupElement& g, const CotangentCovector& alpha);

void check_same_tag(GroupTag a, GroupTag b, const char* where);

// SE(2) element from heading and position.
GroupElement se2(double theta, double x, double y);
GroupElement so3_rotation(const Vec3& axis, double angle);

}  // namespace lpvi
