// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#include "xaudit/explanations.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace xaudit {

bool AnchorRegion::contains(const Vec& x, double tol) const {
  switch (kind) {
    case Kind::Box:
      if (x.size() != lower.size()) return false;
      for (int i = 0; i < x.size(); ++i) {
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
      }
      return true;
    case Kind::Ray: {
      if (x.size() != direction.size()) return false;
      const double lambda = direction.dot(x);
      if (lambda <= tol) return false;
      return (x - lambda * direction).norm() <= tol * std::max(1.0, lambda);
    }
    case Kind::Interval:
      if (x.size() != 2) return false;
      if (std::lround(x[1]) != g) return false;
      return x[0] >= lo - tol && x[0] <= hi + tol;
  }
  return false;
}

double default_gamma(const Vec& x) {
  return 1e-6 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
}

CounterfactualPoint counterfactual_lc(const LinearClassifier& h, const Vec& x,
                                      double gamma) {
  const double wn2 = h.w.squaredNorm();
  if (!(wn2 > 0.0))
    throw config_error("counterfactual_lc: degenerate zero-weight hypothesis");
  if (!(gamma > 0.0)) throw config_error("counterfactual_lc: gamma must be > 0");
  const double margin = h.w.dot(x) + h.b;
  const double lambda = margin / wn2;
  const Vec xp =
      x - lambda * h.w - (gamma * sign(margin) / std::sqrt(wn2)) * h.w;
  return {xp};
}

CounterfactualPoint counterfactual_et(const ExtendedThreshold& h, double v,
                                      int g) {
  const int y = h.predict(v, g);
  // Candidate on axis j is the threshold point (theta_j, j), standing for the
  // opposite side of that axis. For a +1 query the opposite side exists only
  // when the threshold sits strictly above the range floor. The query's own
  // axis is visited first, so the strict comparison keeps it on ties.
  const int order[2] = {g, 1 - g};
  double best = 0.0;
  int best_axis = -1;
  for (int axis : order) {
    const double theta = h.threshold(axis);
    if (y == +1 && !(theta > h.lo)) continue;
    const double dv = v - theta;
    const double cross = axis == g ? 0.0 : 1.0;
    const double dist = std::sqrt(dv * dv + cross);
    if (best_axis < 0 || dist < best) {
      best = dist;
      best_axis = axis;
    }
  }
  if (best_axis < 0)
    throw no_counterfactual_error(
        "counterfactual_et: no oppositely labeled point exists");
  Vec xp(2);
  xp << h.threshold(best_axis), static_cast<double>(best_axis);
  return {xp};
}

AnchorRegion anchor_lc(const LinearClassifier& h, const Vec& x,
                       const AnchorLcMode& mode, std::uint64_t seed) {
  const int d = static_cast<int>(x.size());
  if (mode.worst_case) {
    if (!h.homogeneous())
      throw config_error("anchor_lc: worst-case anchors need a homogeneous h");
    const double xn = x.norm();
    if (!(xn > 0.0)) throw config_error("anchor_lc: degenerate ray at zero");
    AnchorRegion a;
    a.kind = AnchorRegion::Kind::Ray;
    a.direction = x / xn;
    a.tau = 1.0;
    a.coverage = 0.0;  // zero measure
    return a;
  }

  if (!(mode.volume > 0.0)) throw config_error("anchor_lc: volume must be > 0");
  const double side = std::pow(mode.volume, 1.0 / d);
  AnchorRegion a;
  a.kind = AnchorRegion::Kind::Box;
  a.lower = x.array() - side / 2.0;
  a.upper = x.array() + side / 2.0;

  const int y = h.predict(x);
  Rng rng(seed);
  int same = 0;
  for (int i = 0; i < mode.n_samples; ++i) {
    same += h.predict(rng.box_point(a.lower, a.upper)) == y ? 1 : 0;
  }
  a.tau = mode.n_samples > 0 ? static_cast<double>(same) / mode.n_samples : 1.0;

  Vec ref_lo = mode.ref_lo.size() == d ? mode.ref_lo : Vec::Constant(d, -1.0);
  Vec ref_hi = mode.ref_hi.size() == d ? mode.ref_hi : Vec::Constant(d, 1.0);
  if (mode.coverage_kind == CoverageKind::Volume) {
    double frac = 1.0;
    for (int i = 0; i < d; ++i) {
      const double span = ref_hi[i] - ref_lo[i];
      const double cut = std::max(
          0.0, std::min(a.upper[i], ref_hi[i]) - std::max(a.lower[i], ref_lo[i]));
      frac *= span > 0.0 ? cut / span : 0.0;
    }
    a.coverage = frac;
  } else {
    int in = 0;
    const int n = std::max(1, mode.n_samples);
    for (int i = 0; i < n; ++i) {
      in += a.contains(rng.box_point(ref_lo, ref_hi)) ? 1 : 0;
    }
    a.coverage = static_cast<double>(in) / n;
  }
  return a;
}

AnchorRegion anchor_et(const ExtendedThreshold& h, double v, int g, double c) {
  if (!(c > 0.0)) throw config_error("anchor_et: length must be > 0");
  const int y = h.predict(v, g);
  AnchorRegion a;
  a.kind = AnchorRegion::Kind::Interval;
  a.g = g;
  a.lo = y == -1 ? std::max(h.lo, v - c) : v;
  a.hi = y == -1 ? v : std::min(h.hi, v + c);

  const double len = a.hi - a.lo;
  const double theta = h.threshold(g);
  if (len <= 0.0) {
    a.tau = 1.0;  // degenerate interval holds only the query itself
  } else if (y == +1) {
    // Same-label measure is the part at or above the threshold.
    a.tau = std::clamp((a.hi - std::max(a.lo, theta)) / len, 0.0, 1.0);
  } else {
    a.tau = std::clamp((std::min(a.hi, theta) - a.lo) / len, 0.0, 1.0);
  }
  a.coverage = len / (h.hi - h.lo);
  return a;
}

std::vector<Vec> sample_anchor(const AnchorRegion& a, int n,
                               std::uint64_t seed) {
  if (n < 0) throw config_error("sample_anchor: n must be >= 0");
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n));
  Rng rng(seed);
  switch (a.kind) {
    case AnchorRegion::Kind::Box: {
      if ((a.upper - a.lower).lpNorm<Eigen::Infinity>() <= 0.0) {
        std::cerr << "xaudit: warning: sampling a zero-measure box anchor\n";
        return out;
      }
      for (int i = 0; i < n; ++i) out.push_back(rng.box_point(a.lower, a.upper));
      break;
    }
    case AnchorRegion::Kind::Ray:
      for (int i = 0; i < n; ++i) {
        const double lambda = 2.0 * (1.0 - rng.uniform01());  // (0, 2]
        out.push_back(lambda * a.direction);
      }
      break;
    case AnchorRegion::Kind::Interval: {
      if (!(a.hi > a.lo)) {
        std::cerr << "xaudit: warning: sampling a zero-measure interval anchor\n";
        return out;
      }
      for (int i = 0; i < n; ++i) {
        Vec p(2);
        p << rng.uniform(a.lo, a.hi), static_cast<double>(a.g);
        out.push_back(std::move(p));
      }
      break;
    }
  }
  return out;
}

}  // namespace xaudit
