// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#include "xaudit/verification.hpp"

#include <algorithm>
#include <cmath>

namespace xaudit {

namespace {

double hoeffding_tail(double delta_gap, int n) {
  return 2.0 * std::exp(-2.0 * delta_gap * delta_gap * n);
}

}  // namespace

Verdict verify_anchor_precision(const AnchorRegion& a, double claimed_tau,
                                int query_label, const LabelOracle& oracle,
                                int n, double delta_gap, std::uint64_t seed) {
  if (n < 1) throw config_error("verify_anchor_precision: n must be >= 1");
  if (!(delta_gap > 0.0))
    throw config_error("verify_anchor_precision: delta_gap must be > 0");
  const auto pts = sample_anchor(a, n, seed);
  if (pts.empty())
    throw config_error("verify_anchor_precision: region has zero mass");
  int same = 0;
  for (const auto& p : pts) same += oracle(p) == query_label ? 1 : 0;
  Verdict v;
  v.estimate = static_cast<double>(same) / static_cast<double>(pts.size());
  v.bound = hoeffding_tail(delta_gap, n);
  v.status = std::abs(claimed_tau - v.estimate) > delta_gap
                 ? Verdict::Status::Flagged
                 : Verdict::Status::Consistent;
  return v;
}

Verdict verify_anchor_coverage(const AnchorRegion& a, double claimed_c,
                               const CoverageReference& ref, int n,
                               double delta_gap, std::uint64_t seed) {
  if (ref.lo.size() != ref.hi.size() || ref.lo.size() == 0)
    throw config_error("verify_anchor_coverage: bad reference box");
  if (!(delta_gap > 0.0))
    throw config_error("verify_anchor_coverage: delta_gap must be > 0");

  Verdict v;
  const bool volume_exact =
      ref.exact && (a.kind == AnchorRegion::Kind::Box ||
                    a.kind == AnchorRegion::Kind::Interval);
  if (volume_exact) {
    // Uniform reference measure: coverage is an overlap-volume ratio.
    double frac = 1.0;
    if (a.kind == AnchorRegion::Kind::Box) {
      for (int i = 0; i < ref.lo.size(); ++i) {
        const double span = ref.hi[i] - ref.lo[i];
        const double cut =
            std::max(0.0, std::min(a.upper[i], ref.hi[i]) -
                              std::max(a.lower[i], ref.lo[i]));
        frac *= span > 0.0 ? cut / span : 0.0;
      }
    } else {
      const double span = ref.hi[0] - ref.lo[0];
      const double cut = std::max(
          0.0, std::min(a.hi, ref.hi[0]) - std::max(a.lo, ref.lo[0]));
      frac = span > 0.0 ? cut / span : 0.0;
    }
    v.estimate = frac;
    v.bound = 0.0;  // exact, no sampling error
  } else {
    if (n < 1) throw config_error("verify_anchor_coverage: n must be >= 1");
    Rng rng(seed);
    int inside = 0;
    for (int i = 0; i < n; ++i) {
      inside += a.contains(rng.box_point(ref.lo, ref.hi)) ? 1 : 0;
    }
    v.estimate = static_cast<double>(inside) / n;
    v.bound = hoeffding_tail(delta_gap, n);
  }
  v.status = std::abs(claimed_c - v.estimate) > delta_gap
                 ? Verdict::Status::Flagged
                 : Verdict::Status::Consistent;
  return v;
}

CounterfactualCheck verify_counterfactual(const Vec& x, const Vec& claimed_xp,
                                          int label_x, const LabelOracle& oracle,
                                          int k_iters, int n_per_iter,
                                          std::uint64_t seed) {
  if (k_iters < 1 || n_per_iter < 1)
    throw config_error("verify_counterfactual: iteration counts must be >= 1");
  if (x.size() != claimed_xp.size())
    throw config_error("verify_counterfactual: dimension mismatch");

  CounterfactualCheck out;
  out.final_radius = (x - claimed_xp).norm();
  out.radius_history.push_back(out.final_radius);
  out.label_ok = oracle(claimed_xp) != label_x;
  out.oracle_queries = 1;
  if (!out.label_ok) return out;

  const int d = static_cast<int>(x.size());
  Rng rng(seed);
  for (int it = 0; it < k_iters; ++it) {
    double best = out.final_radius;
    std::optional<Vec> best_point;
    for (int i = 0; i < n_per_iter; ++i) {
      const Vec p = x + out.final_radius * rng.ball_point(d);
      ++out.oracle_queries;
      if (oracle(p) == label_x) continue;
      const double r = (p - x).norm();
      if (r < best) {
        best = r;
        best_point = p;
      }
    }
    ++out.iterations_used;
    if (best_point) {
      out.improved = best_point;
      out.final_radius = best;
      out.radius_history.push_back(best);
    }
  }
  return out;
}

}  // namespace xaudit
