// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#include "xaudit/auditors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xaudit/explanations.hpp"

namespace xaudit {

namespace {

using Decision = AuditReport::Decision;

// ceil that forgives one-ulp overshoot of an exact integer.
int guarded_ceil(double v) {
  const double nearest = std::round(v);
  if (std::abs(v - nearest) <= 1e-9 * std::max(1.0, std::abs(v))) v = nearest;
  return static_cast<int>(std::ceil(v));
}

std::string render_query(const Vec& x) {
  std::string out;
  for (int i = 0; i < x.size(); ++i) {
    if (i > 0) out += ',';
    out += format_g17(x[i]);
  }
  return out;
}

}  // namespace

int required_pairs(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0) || !(delta > 0.0) || !(delta < 1.0))
    throw config_error("required_pairs: epsilon and delta must be in (0, 1)");
  return std::max(1, guarded_ceil(std::log(1.0 / delta) / epsilon));
}

AuditReport baseline_audit(const DsOracle& ds, const PairSampler& sampler,
                           const AuditConfig& cfg) {
  cfg.validate();
  const int m = required_pairs(cfg.epsilon, cfg.delta);
  Session session(ds, cfg.budget);
  Rng rng(cfg.seed);
  bool responsive = false;
  bool exhausted = false;
  int pairs = 0;
  for (int i = 0; i < m; ++i) {
    if (!session.can_ask(2)) {
      exhausted = true;
      break;
    }
    const Pair p = sampler.sample(rng);
    const int ya = session.ask(p.a).label;
    const int yb = session.ask(p.b).label;
    responsive = responsive || ya != yb;
    ++pairs;
  }
  AuditReport r;
  r.decision = responsive ? Decision::Yes : Decision::No;
  r.queries_used = session.queries();
  r.exhausted = exhausted;
  r.recovered["pairs"] = pairs;
  r.transcript = session.take_transcript();
  return r;
}

AuditReport audit_lc_counterfactual(const DsOracle& ds, const AuditConfig& cfg,
                                    std::optional<Vec> query_override) {
  cfg.validate();
  const auto* lc = std::get_if<LinearClassifier>(&ds.h);
  if (!lc) throw config_error("audit_lc_counterfactual: LC oracle required");
  const int d = lc->dim();
  const int s = cfg.feature(d);
  if (s < 0 || s >= d)
    throw config_error("audit_lc_counterfactual: feature index out of range");

  Session session(ds, cfg.budget);
  AuditReport r;
  if (!session.can_ask()) {
    r.exhausted = true;
    return r;
  }
  Vec x = query_override ? *query_override : Vec::Ones(d);
  const auto read_direction = [&](const Vec& q) -> Vec {
    const Response& resp = session.ask(q);
    const auto* cf = std::get_if<CounterfactualPoint>(&resp.explanation);
    if (!cf)
      throw protocol_error(
          "audit_lc_counterfactual: expected a counterfactual explanation");
    return q - cf->x_prime;
  };

  Vec w_hat = read_direction(x);
  if (w_hat.lpNorm<Eigen::Infinity>() == 0.0 && session.can_ask()) {
    // Boundary query answered by a zero-length flip; retry once, perturbed.
    w_hat = read_direction(x + Vec::Unit(d, 0));
    r.recovered["retried"] = 1.0;
  }
  const double winf = w_hat.lpNorm<Eigen::Infinity>();
  if (winf == 0.0)
    throw protocol_error("audit_lc_counterfactual: degenerate explanation");

  r.decision = std::abs(w_hat[s]) > cfg.tolerance * winf ? Decision::Yes
                                                          : Decision::No;
  r.queries_used = session.queries();
  const Vec dir = w_hat / w_hat.norm();
  for (int i = 0; i < d; ++i) r.recovered["w_hat_" + std::to_string(i)] = dir[i];
  r.transcript = session.take_transcript();
  return r;
}

AuditReport audit_lc_anchor(const DsOracle& ds, const AuditConfig& cfg,
                            const LcAnchorParams& params,
                            EllipsoidD* final_ellipsoid) {
  cfg.validate();
  const auto* lc = std::get_if<LinearClassifier>(&ds.h);
  if (!lc) throw config_error("audit_lc_anchor: LC oracle required");
  if (!lc->homogeneous())
    throw config_error("audit_lc_anchor: homogeneous classifiers only");
  const int d = lc->dim();
  if (d < 2) throw config_error("audit_lc_anchor: d must be >= 2");
  const int s = cfg.feature(d);
  const double c = dimension_constant(d);
  const double threshold = cfg.epsilon / (2.0 * c);
  const int T = params.T
                    ? *params.T
                    : std::max(1, guarded_ceil(4.0 * d *
                                               std::log2(2.0 * c / cfg.epsilon)));

  Session session(ds, cfg.budget);
  Rng rng(cfg.seed);
  LabeledSet constraints;
  bool exhausted = false;
  int round = 0;

  const auto absorb = [&](const Vec& q) {
    const Response& resp = session.ask(q);
    constraints.add(q, resp.label, false);
    if (const auto* a = std::get_if<AnchorRegion>(&resp.explanation)) {
      const auto pts = sample_anchor(
          *a, params.aug_size,
          derive_seed(cfg.seed, "aug:" + std::to_string(round) + ":" +
                                    render_query(q)));
      // Anchor points are assumed to share the query's label; the assumption
      // is revocable (augmented cuts may be dropped), the query's is not.
      for (const auto& p : pts) constraints.add(p, resp.label, true);
    }
    ++round;
  };

  Vec warm;
  for (int i = 0; i < params.warmup_size; ++i) {
    if (!session.can_ask()) {
      exhausted = true;
      break;
    }
    if (i % 2 == 0) warm = rng.unit_vector(d);
    absorb(i % 2 == 0 ? warm : Vec(-warm));
  }
  auto e = estimate_ellipsoid(constraints, d);
  for (int t = 0; t < T && !exhausted; ++t) {
    if (!session.can_ask()) {
      exhausted = true;
      break;
    }
    const Vec q =
        e.mu.norm() > 1e-12 ? synthesize_query(e) : rng.unit_vector(d);
    absorb(q);
    e = estimate_ellipsoid(constraints, d);
  }

  // Threshold test in the scaling where the non-interest block is unit norm.
  const double mu_s = e.mu[s];
  const double block =
      std::sqrt(std::max(0.0, e.mu.squaredNorm() - mu_s * mu_s));
  bool yes;
  if (block <= 1e-15) {
    yes = std::abs(mu_s) > 1e-15;
  } else {
    yes = std::abs(mu_s) / block > threshold;
  }

  AuditReport r;
  r.decision = yes ? Decision::Yes : Decision::No;
  r.queries_used = session.queries();
  r.exhausted = exhausted;
  const double mu_norm = e.mu.norm();
  if (mu_norm > 0.0) {
    const Vec dir = e.mu / mu_norm;
    for (int i = 0; i < d; ++i)
      r.recovered["w_hat_" + std::to_string(i)] = dir[i];
  }
  r.recovered["Delta"] = threshold;
  r.recovered["T"] = T;
  r.recovered["dropped"] = constraints.dropped_count();
  r.transcript = session.take_transcript();
  if (final_ellipsoid) *final_ellipsoid = e;
  return r;
}

AuditReport audit_et_counterfactual(const DsOracle& ds,
                                    const AuditConfig& cfg) {
  cfg.validate();
  const auto* et = std::get_if<ExtendedThreshold>(&ds.h);
  if (!et) throw config_error("audit_et_counterfactual: ET oracle required");

  Session session(ds, cfg.budget);
  AuditReport r;
  if (!session.can_ask(2)) {
    r.exhausted = true;
    return r;
  }

  double theta_hat[2] = {0.0, 0.0};
  bool seen[2] = {false, false};
  for (int g : {0, 1}) {
    Vec q(2);
    q << (g == 0 ? et->lo : et->hi), static_cast<double>(g);
    const Response& resp = session.ask(q);
    const auto* cf = std::get_if<CounterfactualPoint>(&resp.explanation);
    if (!cf || cf->x_prime.size() != 2)
      throw protocol_error(
          "audit_et_counterfactual: expected a threshold-point explanation");
    const int axis = static_cast<int>(std::lround(cf->x_prime[1]));
    if (axis != 0 && axis != 1)
      throw protocol_error("audit_et_counterfactual: malformed explanation");
    theta_hat[axis] = cf->x_prime[0];
    seen[axis] = true;
  }

  r.queries_used = session.queries();
  if (seen[0] && seen[1]) {
    const double gap = std::abs(theta_hat[0] - theta_hat[1]);
    r.decision = gap > cfg.tolerance ? Decision::Yes : Decision::No;
    r.recovered["theta1_hat"] = theta_hat[0];
    r.recovered["theta2_hat"] = theta_hat[1];
    r.recovered["score_hat"] = gap / (et->hi - et->lo);
  } else {
    // Both explanations landed on one axis. A cross-axis threshold point only
    // wins the nearest-candidate race against a same-axis one when the
    // thresholds are far apart (the group step alone costs a full unit), so
    // this configuration certifies a nonzero gap even though the other
    // threshold is unrecoverable from these two answers.
    const int axis = seen[0] ? 0 : 1;
    r.decision = Decision::Yes;
    r.recovered[axis == 0 ? "theta1_hat" : "theta2_hat"] = theta_hat[axis];
    r.recovered["duplicated_axis"] = 1.0;
  }
  r.transcript = session.take_transcript();
  return r;
}

AuditReport audit_et_anchor(const DsOracle& ds, const AuditConfig& cfg) {
  cfg.validate();
  const auto* et = std::get_if<ExtendedThreshold>(&ds.h);
  if (!et) throw config_error("audit_et_anchor: ET oracle required");
  if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 1.0))
    throw config_error("audit_et_anchor: epsilon must be in (0, 1)");
  const int steps = std::max(1, guarded_ceil(std::log2(1.0 / cfg.epsilon)));

  Session session(ds, cfg.budget);
  AuditReport r;
  double t_min = et->lo;
  double t_max = et->hi;
  bool exhausted = false;
  for (int t = 0; t < steps; ++t) {
    if (!session.can_ask(2)) {
      exhausted = true;
      break;
    }
    const double mid = 0.5 * (t_min + t_max);
    Vec q0(2), q1(2);
    q0 << mid, 0.0;
    q1 << mid, 1.0;
    const int y0 = session.ask(q0).label;
    const int y1 = session.ask(q1).label;
    if (y0 != y1) {
      r.decision = Decision::Yes;
      r.queries_used = session.queries();
      r.recovered["responsive_mid"] = mid;
      r.transcript = session.take_transcript();
      return r;
    }
    // Shared label +1 puts both thresholds at or below the midpoint, -1
    // strictly above it; the other half cannot contain them.
    if (y0 == +1) {
      t_max = mid;
    } else {
      t_min = mid;
    }
  }
  r.decision = Decision::No;
  r.queries_used = session.queries();
  r.exhausted = exhausted;
  r.recovered["interval_lo"] = t_min;
  r.recovered["interval_hi"] = t_max;
  r.transcript = session.take_transcript();
  return r;
}

namespace {

// Whether a hypothesis is consistent with one observed (query, label,
// explanation) outcome. Anchor samples are keyed to (seed, query) so every
// member is judged against the same points.
bool consistent_with(const Hypothesis& h, const Vec& q, const Response& resp,
                     const AuditConfig& cfg, int n_anchor_samples) {
  if (predict(h, q) != resp.label) return false;
  if (const auto* cf = std::get_if<CounterfactualPoint>(&resp.explanation)) {
    if (predict(h, cf->x_prime) == -resp.label) return true;
    // Threshold classifiers hand out boundary points as stand-ins for the
    // open opposite side; a point on this member's own boundary is accepted.
    if (const auto* et = std::get_if<ExtendedThreshold>(&h)) {
      const int axis = static_cast<int>(std::lround(cf->x_prime[1]));
      if (axis == 0 || axis == 1) {
        if (std::abs(cf->x_prime[0] - et->threshold(axis)) <= cfg.tolerance)
          return true;
      }
    }
    return false;
  }
  if (const auto* a = std::get_if<AnchorRegion>(&resp.explanation)) {
    const auto pts = sample_anchor(
        *a, n_anchor_samples,
        derive_seed(cfg.seed, "consistency:" + render_query(q)));
    for (const auto& p : pts) {
      if (predict(h, p) != resp.label) return false;
    }
  }
  return true;
}

}  // namespace

AuditReport general_audit(const HypothesisPool& pool,
                          const std::vector<Vec>& grid, const DsOracle& ds,
                          const AuditConfig& cfg,
                          std::vector<std::vector<int>>* survivor_history) {
  cfg.validate();
  const int n = static_cast<int>(pool.members.size());
  if (n == 0) throw config_error("general_audit: empty pool");
  if (pool.scores.size() != pool.members.size())
    throw config_error("general_audit: pool scores missing");
  if (grid.empty()) throw config_error("general_audit: empty query grid");
  constexpr int kAnchorSamples = 64;

  std::vector<char> alive(n, 1);
  const auto record = [&] {
    if (!survivor_history) return;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (alive[i]) idx.push_back(i);
    survivor_history->push_back(std::move(idx));
  };
  const auto settled = [&]() -> std::optional<Decision> {
    bool any_hi = false, any_lo = false;
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      (pool.scores[i] > cfg.epsilon ? any_hi : any_lo) = true;
    }
    if (!any_lo) return Decision::Yes;
    if (!any_hi) return Decision::No;
    return std::nullopt;
  };

  record();

  // Hypothetical responses: what the DS would answer at grid[q] if its model
  // were member m. Members that cannot produce an explanation answer with the
  // bare label.
  const int gsz = static_cast<int>(grid.size());
  std::vector<std::vector<Response>> outcome(
      gsz, std::vector<Response>(static_cast<std::size_t>(n)));
  for (int q = 0; q < gsz; ++q) {
    for (int m = 0; m < n; ++m) {
      DsOracle sim = ds;
      sim.h = pool.members[static_cast<std::size_t>(m)];
      try {
        outcome[q][m] = ds_respond(sim, Query{grid[q]});
      } catch (const no_counterfactual_error&) {
        sim.method = ExplanationMethod::None;
        outcome[q][m] = ds_respond(sim, Query{grid[q]});
      }
    }
  }
  // consistent[q][gen * n + mem]
  std::vector<std::vector<char>> consistent(
      gsz, std::vector<char>(static_cast<std::size_t>(n) * n));
  for (int q = 0; q < gsz; ++q) {
    for (int gen = 0; gen < n; ++gen) {
      for (int mem = 0; mem < n; ++mem) {
        consistent[q][static_cast<std::size_t>(gen) * n + mem] =
            consistent_with(pool.members[static_cast<std::size_t>(mem)],
                            grid[q], outcome[q][gen], cfg, kAnchorSamples);
      }
    }
  }

  AuditReport r;
  Session session(ds, cfg.budget);
  std::vector<char> spent(grid.size(), 0);

  std::optional<Decision> verdict = settled();
  while (!verdict) {
    int best_q = -1;
    int best_worst = std::numeric_limits<int>::max();
    for (int q = 0; q < gsz; ++q) {
      if (spent[q]) continue;
      int worst = 0;
      for (int gen = 0; gen < n; ++gen) {
        if (!alive[gen]) continue;
        int cnt = 0;
        const char* row = consistent[q].data() + static_cast<std::size_t>(gen) * n;
        for (int mem = 0; mem < n; ++mem) cnt += alive[mem] & row[mem];
        worst = std::max(worst, cnt);
      }
      if (worst < best_worst) {
        best_worst = worst;
        best_q = q;
      }
    }
    if (best_q < 0 || !session.can_ask()) {
      // Nothing can shrink the worst case any further (or no budget): the
      // survivors disagree about the score but are indistinguishable here.
      r.exhausted = true;
      verdict = Decision::No;
      break;
    }

    const Response& resp = session.ask(grid[best_q]);
    int pruned = 0;
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      if (!consistent_with(pool.members[static_cast<std::size_t>(i)],
                           grid[best_q], resp, cfg, kAnchorSamples)) {
        alive[i] = 0;
        ++pruned;
      }
    }
    if (std::none_of(alive.begin(), alive.end(), [](char a) { return a != 0; }))
      throw untruthful_ds_error(
          "general_audit: no hypothesis is consistent with the answers");
    if (pruned == 0) {
      spent[best_q] = 1;  // answered exactly as every survivor predicts
    } else {
      std::fill(spent.begin(), spent.end(), 0);
      record();
    }
    verdict = settled();
  }

  r.decision = *verdict;
  r.queries_used = session.queries();
  double lo = 1.0, hi = 0.0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    lo = std::min(lo, pool.scores[static_cast<std::size_t>(i)]);
    hi = std::max(hi, pool.scores[static_cast<std::size_t>(i)]);
    ++count;
  }
  r.recovered["survivors"] = count;
  r.recovered["min_score"] = count ? lo : 0.0;
  r.recovered["max_score"] = count ? hi : 0.0;
  r.transcript = session.take_transcript();
  return r;
}

}  // namespace xaudit
