// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "xaudit/hypotheses.hpp"
#include "xaudit/types.hpp"

namespace xaudit {

// The hypothesis admits no oppositely labeled point for the query.
class no_counterfactual_error : public protocol_error {
 public:
  using protocol_error::protocol_error;
};

struct CounterfactualPoint {
  Vec x_prime;
};

// Region around a query with precision tau (same-label fraction) and
// coverage (fraction of the reference domain).
struct AnchorRegion {
  enum class Kind { Box, Ray, Interval };
  Kind kind = Kind::Box;

  Vec lower, upper;  // Box
  Vec direction;     // Ray: unit direction, region {lambda * direction, lambda > 0}
  double lo = 0.0;   // Interval on the value axis
  double hi = 0.0;
  int g = 0;         // Interval's fixed group bit

  double tau = 1.0;
  double coverage = 0.0;

  bool contains(const Vec& x, double tol = 1e-12) const;
};

// Nearest opposite-label point for a linear classifier:
// x' = x - lambda*w - gamma*sign(<w,x>+b)*w/||w||, lambda = (<w,x>+b)/||w||^2.
// gamma > 0 pushes strictly past the boundary so the label flips.
CounterfactualPoint counterfactual_lc(const LinearClassifier& h, const Vec& x,
                                      double gamma);

// Scale-aware default push: 1e-6 * max(1, ||x||_inf).
double default_gamma(const Vec& x);

// Nearest counterfactual among the threshold points {(theta1,0), (theta2,1)},
// under the finite-precision convention that a threshold point stands for the
// opposite side of its own axis. Crossing the group bit costs a full unit.
// Same-axis candidate wins distance ties.
CounterfactualPoint counterfactual_et(const ExtendedThreshold& h, double v,
                                      int g);

enum class CoverageKind { Volume, Mass };

struct AnchorLcMode {
  bool worst_case = true;
  double volume = 0.0;    // typical: geometric box volume
  int n_samples = 256;    // typical: tau estimation sample count
  CoverageKind coverage_kind = CoverageKind::Volume;
  Vec ref_lo, ref_hi;     // reference domain; default [-1,1]^d
};

// Worst-case mode: the ray through x (tau = 1, zero coverage), which adds no
// information beyond the label for homogeneous classifiers. Typical mode: an
// axis-aligned box of the requested volume centered at x with tau estimated
// by sampling.
AnchorRegion anchor_lc(const LinearClassifier& h, const Vec& x,
                       const AnchorLcMode& mode, std::uint64_t seed);

// Interval anchor on the value axis: [v - c, v] when the label is -1,
// [v, v + c] when +1, clipped to the domain. tau is exact from the overlap
// with the relevant threshold.
AnchorRegion anchor_et(const ExtendedThreshold& h, double v, int g, double c);

// Box -> uniform points; Ray -> lambda * direction with lambda uniform in
// (0, 2]; Interval -> (v, g) points with v uniform. Degenerate zero-measure
// regions yield an empty sequence.
std::vector<Vec> sample_anchor(const AnchorRegion& a, int n, std::uint64_t seed);

}  // namespace xaudit
