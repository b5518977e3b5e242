#pragma once

// Retraction maps tau: g -> G with right-trivialized tangents.
//
//   d/de tau(xi + e eta)|_0 = hat(dtau_xi eta) tau(xi)
//
// Cayley is the default; the truncated exponential exists for cross-checks.

#include <string>

#include "lpvi/lie.h"

namespace lpvi {

enum class RetractionKind { kCayley, kTruncExp };

class Retraction {
 public:
  static Retraction cayley(GroupTag tag);
  // Truncated exponential series of the given order, projected onto the
  // group. Throws ConfigError for order < 1.
  static Retraction trunc_exp(GroupTag tag, int order);
  // "cayley" or "expN" with N a positive integer.
  static Retraction from_name(GroupTag tag, const std::string& name);

  GroupTag tag() const { return tag_; }
  RetractionKind kind() const { return kind_; }
  int order() const { return order_; }
  std::string name() const;

  GroupElement tau(const Vec3& xi) const;
  Vec3 tau_inv(const GroupElement& g) const;

  Mat3 dtau_matrix(const Vec3& xi) const;
  Mat3 dtau_inv_matrix(const Vec3& xi) const;
  // Partial derivative of dtau_inv_matrix(xi) with respect to xi(j).
  Mat3 dtau_inv_partial(const Vec3& xi, int j) const;

 private:
  Retraction(GroupTag tag, RetractionKind kind, int order)
      : tag_(tag), kind_(kind), order_(order) {}

  void check_injectivity(const GroupElement& g) const;
  Vec3 cayley_inv(const GroupElement& g) const;

  GroupTag tag_;
  RetractionKind kind_;
  int order_;
};

GroupElement tau(const Retraction& r, const AlgebraVector& xi);
AlgebraVector tau_inv(const Retraction& r, const GroupElement& g);
AlgebraVector dtau(const Retraction& r, const AlgebraVector& xi,
                   const AlgebraVector& eta);
AlgebraVector dtau_inv(const Retraction& r, const AlgebraVector& xi,
                       const AlgebraVector& eta);
CovectorAlg dtau_inv_star(const Retraction& r, const AlgebraVector& xi,
                          const CovectorAlg& mu);

}  // namespace lpvi
