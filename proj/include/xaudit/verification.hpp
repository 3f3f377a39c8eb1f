// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "xaudit/explanations.hpp"
#include "xaudit/types.hpp"

namespace xaudit {

using LabelOracle = std::function<int(const Vec&)>;

// Outcome of one statistical check. bound is the two-sided Hoeffding tail
// 2 exp(-2 delta_gap^2 n) for the sample size used.
struct Verdict {
  enum class Status { Consistent, Flagged };
  Status status = Status::Consistent;
  double estimate = 0.0;
  double bound = 0.0;

  bool flagged() const { return status == Status::Flagged; }
};

// Estimates the anchor's precision as the fraction of n region samples the
// oracle labels like the query, and flags claims further than delta_gap away.
Verdict verify_anchor_precision(const AnchorRegion& a, double claimed_tau,
                                int query_label, const LabelOracle& oracle,
                                int n, double delta_gap, std::uint64_t seed);

// Reference distribution for coverage checks: uniform on an axis-aligned box.
struct CoverageReference {
  Vec lo, hi;
  bool exact = true;  // volume ratio when the region allows it, else sampling
};

Verdict verify_anchor_coverage(const AnchorRegion& a, double claimed_c,
                               const CoverageReference& ref, int n,
                               double delta_gap, std::uint64_t seed);

struct CounterfactualCheck {
  bool label_ok = false;
  std::optional<Vec> improved;   // closest differing-label point found
  double final_radius = 0.0;
  int iterations_used = 0;
  int oracle_queries = 0;        // exactly 1 + iterations_used * n_per_iter
  std::vector<double> radius_history;
};

// Ball-shrinking check of a claimed counterfactual: one query confirms the
// label flip, then k_iters rounds of n_per_iter uniform samples from the
// current ball B(x, r) tighten r to any closer differing-label point found.
// The query's own label is known from the transcript and passed in.
CounterfactualCheck verify_counterfactual(const Vec& x, const Vec& claimed_xp,
                                          int label_x, const LabelOracle& oracle,
                                          int k_iters, int n_per_iter,
                                          std::uint64_t seed);

// What the harness does after a Flagged verdict.
enum class FlagPolicy { Stop, AuditWithEstimates, FallbackBaseline };

}  // namespace xaudit
