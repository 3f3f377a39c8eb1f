// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xaudit/ellipsoid.hpp"
#include "xaudit/hypotheses.hpp"
#include "xaudit/protocol.hpp"
#include "xaudit/types.hpp"

namespace xaudit {

// m = ceil((1/epsilon) * ln(1/delta)). Values within 1e-9 of an integer are
// rounded before the ceiling so exact products do not pay for one ulp.
int required_pairs(double epsilon, double delta);

// Random-pair baseline: queries required_pairs(eps, delta) pairs from the
// sampler (two point queries each); Yes iff any pair was responsive.
// Budget exhaustion falls back to No over the pairs seen.
AuditReport baseline_audit(const DsOracle& ds, const PairSampler& sampler,
                           const AuditConfig& cfg);

// One counterfactual query (all-ones by default): w-hat = x - x', Yes iff
// |w-hat_s| > tolerance * ||w-hat||_inf. A degenerate zero-length answer is
// retried once with a perturbed query. The report carries w-hat / ||w-hat||.
AuditReport audit_lc_counterfactual(const DsOracle& ds, const AuditConfig& cfg,
                                    std::optional<Vec> query_override = {});

struct LcAnchorParams {
  int aug_size = 30;             // anchor samples added per query, at most
  int warmup_size = 2;           // labeled warm-up queries before synthesis
  std::optional<int> T;          // default ceil(4 d log2(2c/eps)), at least 1
};

// Version-space auditor for homogeneous linear classifiers with anchor
// explanations. After the warm-up, each round synthesizes a query orthogonal
// to the center, adds the labeled query plus aug_size anchor samples (with
// the query's label) to the constraint set, and re-estimates the ellipsoid.
// Decision: rescale mu so the non-interest block has unit norm, then
// Yes iff |mu_s| > Delta = eps / (2 c(d)).
AuditReport audit_lc_anchor(const DsOracle& ds, const AuditConfig& cfg,
                            const LcAnchorParams& params = {},
                            EllipsoidD* final_ellipsoid = nullptr);

// Two counterfactual queries at (lo, 0) and (hi, 1); thresholds are read off
// the explanations by their group coordinate. Yes iff the recovered
// thresholds differ by more than the tolerance. When both explanations land
// on one axis the other threshold is unrecoverable, but that configuration
// itself certifies a nonzero gap, so the answer is Yes.
AuditReport audit_et_counterfactual(const DsOracle& ds, const AuditConfig& cfg);

// Binary search over the value range: each step queries the midpoint at both
// group bits; differing labels certify a responsive pair (Yes), otherwise
// the half interval on the side the shared label indicates survives. No
// after ceil(log2(1/eps)) steps without detection.
AuditReport audit_et_anchor(const DsOracle& ds, const AuditConfig& cfg);

// Finite-pool generic auditor. Each round scores every unspent grid point by
// the worst case, over outcomes realizable within the surviving pool, of the
// post-pruning survivor count, and queries the best one (ties to the lowest
// index). Survivors must match the returned label and explanation
// (counterfactual: h(x) = y and h(x') = -y; anchor: h labels 64 sampled
// region points y). Stops Yes when every survivor's score exceeds epsilon,
// No when none does. A query whose answer prunes nothing is retired until
// any progress is made; when all are retired the auditor gives up with a
// No and the exhausted flag.
AuditReport general_audit(const HypothesisPool& pool,
                          const std::vector<Vec>& grid, const DsOracle& ds,
                          const AuditConfig& cfg,
                          std::vector<std::vector<int>>* survivor_history = nullptr);

}  // namespace xaudit
