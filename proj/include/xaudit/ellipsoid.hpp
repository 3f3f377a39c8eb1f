// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "xaudit/types.hpp"

namespace xaudit {

// Bounding ellipsoid {w : (w - mu)' Sigma^-1 (w - mu) <= 1} of the version
// space of consistent homogeneous linear classifiers.
template <typename Scalar>
struct Ellipsoid {
  using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  VecT mu;
  MatT sigma;

  static Ellipsoid unit_ball(Eigen::Index d) {
    return {VecT::Zero(d), MatT::Identity(d, d)};
  }

  Eigen::Index dim() const { return mu.size(); }

  bool contains(const VecT& w, Scalar slack = Scalar(1e-9)) const {
    VecT diff = w - mu;
    VecT z = sigma.llt().solve(diff);
    return diff.dot(z) <= Scalar(1) + slack;
  }

  Scalar sqrt_det() const {
    return std::sqrt(sigma.determinant());
  }
};

using EllipsoidD = Ellipsoid<double>;

enum class CutOutcome { Applied, Redundant, Infeasible };

// Deep-cut update for the halfspace a'w <= 0. With g = sqrt(a'Sigma a) and
// alpha = a'mu / g: alpha <= -1/d leaves the ellipsoid unchanged (the cut is
// redundant), alpha >= 1 is infeasible, otherwise the minimum-volume
// ellipsoid containing e intersect {a'w <= 0} replaces e in place.
template <typename Scalar>
CutOutcome try_cut(Ellipsoid<Scalar>& e,
                   const typename Ellipsoid<Scalar>::VecT& a) {
  using VecT = typename Ellipsoid<Scalar>::VecT;
  const Scalar d = static_cast<Scalar>(e.dim());
  VecT sa = e.sigma * a;
  const Scalar g2 = a.dot(sa);
  const Scalar g = g2 > Scalar(0) ? std::sqrt(g2) : Scalar(0);
  // Extent along a below the numerical resolution of the collapsed ellipsoid:
  // the direction is exhausted and alpha would be roundoff noise, so the cut
  // cannot slice anything real off. Genuine contradictions show up while the
  // extent is still macroscopic.
  if (!(g > Scalar(1e-7) * a.norm() * (Scalar(1) + e.mu.norm())))
    return CutOutcome::Redundant;
  const Scalar alpha = a.dot(e.mu) / g;
  if (alpha >= Scalar(1)) return CutOutcome::Infeasible;
  if (alpha <= Scalar(-1) / d) return CutOutcome::Redundant;

  const Scalar step = (Scalar(1) + d * alpha) / (d + Scalar(1));
  e.mu -= (step / g) * sa;
  const Scalar scale = d * d * (Scalar(1) - alpha * alpha) / (d * d - Scalar(1));
  const Scalar rank1 =
      Scalar(2) * (Scalar(1) + d * alpha) /
      ((d + Scalar(1)) * (Scalar(1) + alpha));
  e.sigma = scale * (e.sigma - (rank1 / (g * g)) * (sa * sa.transpose()));
  // Symmetrize against roundoff drift.
  e.sigma = ((e.sigma + e.sigma.transpose()) / Scalar(2)).eval();
  return CutOutcome::Applied;
}

// Labeled constraint y * <w, x> >= 0, as the halfspace a'w <= 0 with
// a = -y * x. Synthetic anchor-augmented constraints carry an assumed label
// and may be dropped; real DS answers may not.
struct LabeledConstraint {
  Vec x;  // unit norm
  int y = +1;
  bool augmented = false;
  bool dropped = false;
};

// Insertion-ordered constraint set. Two constraints with the same halfspace
// normal -y * x / ||x|| (within 1e-12) cut identically, so duplicates are not
// stored; this is what makes ray-anchor augmentation, and a warm-up query
// paired with its negation, structural no-ops.
class LabeledSet {
 public:
  // Returns false when the point is degenerate or duplicates a halfspace.
  bool add(const Vec& x, int y, bool augmented = false) {
    const double n = x.norm();
    if (!(n > 0.0) || !x.allFinite()) return false;
    Vec u = x / n;
    const Vec a = -static_cast<double>(y) * u;
    for (const auto& c : items_) {
      const Vec ca = -static_cast<double>(c.y) * c.x;
      if ((ca - a).lpNorm<Eigen::Infinity>() <= 1e-12) return false;
    }
    items_.push_back({std::move(u), y, augmented, false});
    return true;
  }

  std::vector<LabeledConstraint>& items() { return items_; }
  const std::vector<LabeledConstraint>& items() const { return items_; }
  int size() const { return static_cast<int>(items_.size()); }
  int dropped_count() const {
    int k = 0;
    for (const auto& c : items_) k += c.dropped ? 1 : 0;
    return k;
  }

 private:
  std::vector<LabeledConstraint> items_;
};

// One pass over the live constraints in insertion order. Infeasible cuts from
// augmented constraints drop the constraint (its label was only assumed);
// infeasible cuts from real answers contradict a truthful DS.
template <typename Scalar>
Scalar sweep_once(Ellipsoid<Scalar>& e, LabeledSet& q) {
  using VecT = typename Ellipsoid<Scalar>::VecT;
  const Scalar before = e.sqrt_det();
  for (auto& c : q.items()) {
    if (c.dropped) continue;
    VecT a = (-c.y) * c.x.template cast<Scalar>();
    switch (try_cut(e, a)) {
      case CutOutcome::Infeasible:
        if (c.augmented) {
          c.dropped = true;
          break;
        }
        throw untruthful_ds_error(
            "estimate_ellipsoid: constraint set is infeasible");
      default:
        break;
    }
  }
  const Scalar after = e.sqrt_det();
  return before > Scalar(0) ? after / before : Scalar(1);
}

struct EstimateOptions {
  int max_sweeps = 50;
  double tol = 1e-6;  // stop when a sweep shrinks sqrt(det) by less than this
};

// From-scratch estimate: unit ball, then repeated sweeps until a full sweep
// no longer shrinks sqrt(det(Sigma)) by a relative 1e-6, or 50 sweeps.
// The returned ellipsoid contains every unit-norm w consistent with q.
template <typename Scalar>
Ellipsoid<Scalar> estimate_ellipsoid(LabeledSet& q, int d,
                                     const EstimateOptions& opt = {}) {
  auto e = Ellipsoid<Scalar>::unit_ball(d);
  for (int s = 0; s < opt.max_sweeps; ++s) {
    const Scalar ratio = sweep_once(e, q);
    if (ratio >= Scalar(1) - static_cast<Scalar>(opt.tol)) break;
  }
  return e;
}

inline EllipsoidD estimate_ellipsoid(LabeledSet& q, int d,
                                     const EstimateOptions& opt = {}) {
  return estimate_ellipsoid<double>(q, d, opt);
}

// Next query direction: the longest axis of the ellipsoid restricted to the
// orthogonal complement of the center. N spans the complement (Gram-Schmidt
// completion of mu), and the top eigenvector of N' Sigma N comes from power
// iteration with a fixed seeded start (tolerance 1e-10). The result has unit
// norm and |<q, mu>| <= 1e-10 * ||mu||.
template <typename Scalar>
typename Ellipsoid<Scalar>::VecT synthesize_query(const Ellipsoid<Scalar>& e) {
  using VecT = typename Ellipsoid<Scalar>::VecT;
  using MatT = typename Ellipsoid<Scalar>::MatT;
  const Eigen::Index d = e.dim();
  const Scalar mu_norm = e.mu.norm();
  if (!(mu_norm > Scalar(0)))
    throw config_error("synthesize_query: zero center requires warm-up");

  MatT n(d, d - 1);
  VecT u0 = e.mu / mu_norm;
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < d && col < d - 1; ++i) {
    VecT v = VecT::Unit(d, i);
    v -= u0.dot(v) * u0;
    for (Eigen::Index j = 0; j < col; ++j) v -= n.col(j).dot(v) * n.col(j);
    const Scalar nv = v.norm();
    if (nv < Scalar(1e-8)) continue;  // basis vector nearly parallel to mu
    n.col(col++) = v / nv;
  }
  if (col != d - 1)
    throw config_error("synthesize_query: complement construction failed");

  MatT m = n.transpose() * e.sigma * n;
  m = ((m + m.transpose()) / Scalar(2)).eval();

  // Fixed seeded start keeps the iteration deterministic.
  Rng rng(0x51e57a37u);
  VecT v = rng.normal_vector(static_cast<int>(d - 1)).template cast<Scalar>();
  v /= v.norm();
  for (int it = 0; it < 20000; ++it) {
    VecT next = m * v;
    const Scalar nn = next.norm();
    if (!(nn > Scalar(0))) break;  // Sigma restricted to the complement is 0
    next /= nn;
    if (next.dot(v) < Scalar(0)) next = -next;
    const Scalar delta = (next - v).norm();
    v = next;
    if (delta <= Scalar(1e-10)) break;
  }
  VecT q = n * v;
  q /= q.norm();
  return q;
}

}  // namespace xaudit
