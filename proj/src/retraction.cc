#include "lpvi/retraction.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace lpvi {

Retraction Retraction::cayley(GroupTag tag) {
  return Retraction(tag, RetractionKind::kCayley, 0);
}

Retraction Retraction::trunc_exp(GroupTag tag, int order) {
  if (order < 1) {
    throw ConfigError("retraction: truncation order must be >= 1, got " +
                      std::to_string(order));
  }
  return Retraction(tag, RetractionKind::kTruncExp, order);
}

Retraction Retraction::from_name(GroupTag tag, const std::string& name) {
  if (name == "cayley") return cayley(tag);
  if (name.size() > 3 && name.compare(0, 3, "exp") == 0) {
    const std::string digits = name.substr(3);
    if (digits.find_first_not_of("0123456789") == std::string::npos) {
      return trunc_exp(tag, std::stoi(digits));
    }
  }
  throw ConfigError("retraction: expected \"cayley\" or \"expN\", got \"" +
                    name + "\"");
}

std::string Retraction::name() const {
  return kind_ == RetractionKind::kCayley ? "cayley"
                                          : "exp" + std::to_string(order_);
}

namespace {

// Sum_{j=0}^{n} x^j / j!
Mat3 exp_series(const Mat3& x, int n) {
  Mat3 term = Mat3::Identity();
  Mat3 sum = term;
  for (int j = 1; j <= n; ++j) {
    term = term * x / static_cast<double>(j);
    sum += term;
  }
  return sum;
}

double rotation_angle(const GroupElement& g) {
  if (g.tag == GroupTag::kSE2) return std::atan2(g.matrix(1, 0), g.matrix(0, 0));
  const double c = std::clamp(0.5 * (g.matrix.trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace

GroupElement Retraction::tau(const Vec3& xi) const {
  GroupElement g{Mat3::Identity(), tag_};
  if (kind_ == RetractionKind::kTruncExp) {
    g.matrix = exp_series(hat(tag_, xi), order_);
    return reproject(g);
  }
  if (tag_ == GroupTag::kSO3) {
    const Mat3 w = hat(tag_, xi);
    g.matrix += 4.0 / (4.0 + xi.squaredNorm()) * (w + 0.5 * w * w);
    return g;
  }
  const double v1 = xi(0), v2 = xi(1), v3 = xi(2);
  const double s = 1.0 / (4.0 + v1 * v1);
  g.matrix << s * (4.0 - v1 * v1), -4.0 * v1 * s, s * (-2.0 * v1 * v3 + 4.0 * v2),
              4.0 * v1 * s, s * (4.0 - v1 * v1), s * (2.0 * v1 * v2 + 4.0 * v3),
              0.0, 0.0, 1.0;
  return g;
}

void Retraction::check_injectivity(const GroupElement& g) const {
  check_same_tag(g.tag, tag_, "tau_inv");
  if (std::abs(std::abs(rotation_angle(g)) - M_PI) < 1e-6) {
    throw SingularityError(
        "tau_inv: rotation angle within 1e-6 of pi, outside the retraction "
        "domain; reduce the step size h");
  }
  const Mat3 shifted = g.matrix + Mat3::Identity();
  const double det = shifted.determinant();
  const double cond = det != 0.0 ? shifted.norm() * shifted.inverse().norm()
                                 : INFINITY;
  if (cond > 1e8) {
    throw SingularityError("tau_inv: g + e is ill-conditioned (condition " +
                           std::to_string(cond) +
                           "); reduce the step size h");
  }
}

Vec3 Retraction::cayley_inv(const GroupElement& g) const {
  const Mat3 x = 2.0 * (g.matrix - Mat3::Identity()) *
                 (g.matrix + Mat3::Identity()).inverse();
  // Read the coordinates off the antisymmetric part to absorb round-off.
  if (tag_ == GroupTag::kSO3) {
    return Vec3(0.5 * (x(2, 1) - x(1, 2)), 0.5 * (x(0, 2) - x(2, 0)),
                0.5 * (x(1, 0) - x(0, 1)));
  }
  return Vec3(0.5 * (x(1, 0) - x(0, 1)), x(0, 2), x(1, 2));
}

Vec3 Retraction::tau_inv(const GroupElement& g) const {
  check_injectivity(g);
  Vec3 xi = cayley_inv(g);
  if (kind_ == RetractionKind::kCayley) return xi;
  // Fixed-point refinement: tau(xi + d) tau(xi)^-1 ~ e + hat(dtau_xi d).
  for (int it = 0; it < 200; ++it) {
    const GroupElement r = compose(g, inverse(tau(xi)));
    const Vec3 d = dtau_inv_matrix(xi) * cayley_inv(r);
    xi += d;
    if (d.norm() <= 1e-15 * std::max(1.0, xi.norm())) break;
  }
  return xi;
}

Mat3 Retraction::dtau_matrix(const Vec3& xi) const {
  if (kind_ == RetractionKind::kTruncExp) {
    const Mat3 ad = ad_matrix(tag_, xi);
    Mat3 term = Mat3::Identity();
    Mat3 sum = term;
    for (int j = 1; j < order_; ++j) {
      term = term * ad / static_cast<double>(j + 1);
      sum += term;
    }
    return sum;
  }
  if (tag_ == GroupTag::kSO3) {
    return 2.0 / (4.0 + xi.squaredNorm()) *
           (2.0 * Mat3::Identity() + hat(tag_, xi));
  }
  return dtau_inv_matrix(xi).inverse();
}

Mat3 Retraction::dtau_inv_matrix(const Vec3& xi) const {
  if (kind_ == RetractionKind::kTruncExp) return dtau_matrix(xi).inverse();
  if (tag_ == GroupTag::kSO3) {
    return Mat3::Identity() - 0.5 * hat(tag_, xi) +
           0.25 * xi * xi.transpose();
  }
  Mat3 m = Mat3::Identity() - 0.5 * ad_matrix(tag_, xi);
  m.col(0) += 0.25 * xi(0) * xi;
  return m;
}

Mat3 Retraction::dtau_inv_partial(const Vec3& xi, int j) const {
  const Vec3 e = Vec3::Unit(j);
  if (kind_ == RetractionKind::kTruncExp) {
    const double step = 1e-6;
    return (dtau_inv_matrix(xi + step * e) - dtau_inv_matrix(xi - step * e)) /
           (2.0 * step);
  }
  if (tag_ == GroupTag::kSO3) {
    return -0.5 * hat(tag_, e) +
           0.25 * (e * xi.transpose() + xi * e.transpose());
  }
  Mat3 m = -0.5 * ad_matrix(tag_, e);
  m.col(0) += 0.25 * ((j == 0 ? 1.0 : 0.0) * xi + xi(0) * e);
  return m;
}

GroupElement tau(const Retraction& r, const AlgebraVector& xi) {
  check_same_tag(r.tag(), xi.tag, "tau");
  return r.tau(xi.coords);
}

AlgebraVector tau_inv(const Retraction& r, const GroupElement& g) {
  return {r.tau_inv(g), r.tag()};
}

AlgebraVector dtau(const Retraction& r, const AlgebraVector& xi,
                   const AlgebraVector& eta) {
  check_same_tag(r.tag(), xi.tag, "dtau");
  check_same_tag(xi.tag, eta.tag, "dtau");
  return {r.dtau_matrix(xi.coords) * eta.coords, r.tag()};
}

AlgebraVector dtau_inv(const Retraction& r, const AlgebraVector& xi,
                       const AlgebraVector& eta) {
  check_same_tag(r.tag(), xi.tag, "dtau_inv");
  check_same_tag(xi.tag, eta.tag, "dtau_inv");
  return {r.dtau_inv_matrix(xi.coords) * eta.coords, r.tag()};
}

CovectorAlg dtau_inv_star(const Retraction& r, const AlgebraVector& xi,
                          const CovectorAlg& mu) {
  check_same_tag(r.tag(), xi.tag, "dtau_inv_star");
  check_same_tag(xi.tag, mu.tag, "dtau_inv_star");
  return {r.dtau_inv_matrix(xi.coords).transpose() * mu.coords, r.tag()};
}

}  // namespace lpvi
