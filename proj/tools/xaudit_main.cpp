// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface: single audits, the two batch experiments, and
// explanation verification. Exit codes: 0 success, 1 usage or config error,
// 2 protocol violation or untruthful DS.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xaudit/auditors.hpp"
#include "xaudit/harness.hpp"
#include "xaudit/verification.hpp"

namespace {

using namespace xaudit;

using ConfigMap = std::map<std::string, std::string>;

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw config_error("bad number '" + tok + "' in " + what);
    }
  }
  if (out.empty()) throw config_error(what + " is empty");
  return out;
}

Vec parse_vec(const std::string& s, const std::string& what) {
  const auto vals = parse_list(s, what);
  Vec x(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    x[static_cast<Eigen::Index>(i)] = vals[i];
  return x;
}

std::uint64_t effective_seed(const ConfigMap& cfg,
                             const std::optional<std::uint64_t>& override_seed) {
  if (override_seed) return *override_seed;
  return static_cast<std::uint64_t>(config_num(cfg, "seed", 1.0));
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write " + path);
  out << body;
}

DsOracle make_ds(const ConfigMap& cfg, std::uint64_t seed) {
  const std::string spec = config_str(cfg, "ds", "");
  if (spec.empty()) throw config_error("config key 'ds' is required");
  DsOracle ds = synthesize_ds(spec, derive_seed(seed, "ds"));
  ds.seed = derive_seed(seed, "explanations");

  const std::string method = config_str(cfg, "method", "none");
  if (method == "none")
    ds.method = ExplanationMethod::None;
  else if (method == "counterfactual")
    ds.method = ExplanationMethod::Counterfactual;
  else if (method == "anchor")
    ds.method = ExplanationMethod::Anchor;
  else
    throw config_error("unknown method '" + method + "'");

  ds.anchor_mode.worst_case = config_num(cfg, "anchor_worst_case", 1.0) != 0.0;
  ds.anchor_mode.volume = config_num(cfg, "anchor_volume", ds.anchor_mode.volume);
  ds.et_anchor_len = config_num(cfg, "et_anchor_len", ds.et_anchor_len);
  ds.gamma = config_num(cfg, "gamma", ds.gamma);
  return ds;
}

AuditConfig make_audit_config(const ConfigMap& cfg, std::uint64_t seed) {
  AuditConfig ac;
  ac.epsilon = config_num(cfg, "epsilon", 0.05);
  ac.delta = config_num(cfg, "delta", 0.05);
  ac.feature_of_interest = static_cast<int>(config_num(cfg, "feature", -1.0));
  if (cfg.count("budget"))
    ac.budget = static_cast<int>(config_num(cfg, "budget", 0.0));
  ac.tolerance = config_num(cfg, "tolerance", 1e-9);
  ac.seed = derive_seed(seed, "audit");
  return ac;
}

PairSampler make_sampler(const ConfigMap& cfg, const DsOracle& ds,
                         std::uint64_t seed) {
  PairSampler ps;
  ps.seed = derive_seed(seed, "sampler");
  ps.s = static_cast<int>(config_num(cfg, "feature", -1.0));
  const bool is_et = std::holds_alternative<ExtendedThreshold>(ds.h);
  const std::string kind = config_str(cfg, "sampler", is_et ? "box" : "ball");
  if (kind == "ball") {
    ps.base = PairSampler::Base::Ball;
    ps.dim = hypothesis_dim(ds.h);
  } else if (kind == "box") {
    ps.base = PairSampler::Base::Box;
    ps.dim = hypothesis_dim(ds.h);
    double lo = -1.0, hi = 1.0;
    if (is_et) {
      const auto& et = std::get<ExtendedThreshold>(ds.h);
      lo = et.lo;
      hi = et.hi;
    }
    ps.box_lo = Vec::Constant(ps.dim, config_num(cfg, "box_lo", lo));
    ps.box_hi = Vec::Constant(ps.dim, config_num(cfg, "box_hi", hi));
  } else if (kind == "dataset") {
    const std::string path = config_str(cfg, "data", "");
    if (path.empty()) throw config_error("sampler=dataset needs 'data'");
    const DataMatrix m = load_matrix_csv(path);
    ps.base = PairSampler::Base::Dataset;
    ps.dim = static_cast<int>(m.rows.cols());
    ps.data = m.rows;
    // The score bound assumes ||x bar||_2 <= 1; rescale by the max row norm.
    const double max_norm = m.rows.rowwise().norm().maxCoeff();
    if (max_norm > 1.0) ps.data /= max_norm;
  } else {
    throw config_error("unknown sampler '" + kind + "'");
  }
  return ps;
}

AuditReport run_general(const ConfigMap& cfg, DsOracle& ds, AuditConfig& ac,
                        std::uint64_t seed) {
  const int pool_size =
      std::max(1, static_cast<int>(config_num(cfg, "pool_size", 32.0)));
  const int grid_size =
      std::max(1, static_cast<int>(config_num(cfg, "grid_size", 32.0)));
  const int score_samples =
      std::max(1, static_cast<int>(config_num(cfg, "score_samples", 4096.0)));
  const std::string spec = config_str(cfg, "ds", "");

  HypothesisPool pool;
  pool.members.push_back(ds.h);
  for (int i = 1; i < pool_size; ++i)
    pool.members.push_back(
        synthesize_ds(spec, derive_seed(seed, "pool:" + std::to_string(i))).h);

  PairSampler ps = make_sampler(cfg, ds, seed);
  for (const auto& h : pool.members)
    pool.scores.push_back(score_monte_carlo(h, ps, score_samples));

  std::vector<Vec> grid;
  Rng grid_rng(derive_seed(seed, "grid"));
  const bool is_et = std::holds_alternative<ExtendedThreshold>(ds.h);
  for (int i = 0; i < grid_size; ++i) {
    if (is_et) {
      const auto& et = std::get<ExtendedThreshold>(ds.h);
      Vec q(2);
      q[0] = grid_rng.uniform(et.lo, et.hi);
      q[1] = i % 2;
      grid.push_back(q);
    } else {
      grid.push_back(grid_rng.unit_vector(hypothesis_dim(ds.h)));
    }
  }
  return general_audit(pool, grid, ds, ac);
}

std::string report_text(const AuditReport& r) {
  std::ostringstream out;
  out << "decision=" << (r.decision == AuditReport::Decision::Yes ? "Yes" : "No")
      << "\n"
      << "queries_used=" << r.queries_used << "\n"
      << "exhausted=" << (r.exhausted ? 1 : 0) << "\n";
  for (const auto& [k, v] : r.recovered)
    out << "recovered." << k << "=" << format_g17(v) << "\n";
  return out.str();
}

int cmd_audit(const ConfigMap& cfg, std::optional<std::uint64_t> seed_opt,
              const std::string& out_path) {
  const std::uint64_t seed = effective_seed(cfg, seed_opt);
  DsOracle ds = make_ds(cfg, seed);
  AuditConfig ac = make_audit_config(cfg, seed);

  const std::string auditor = config_str(cfg, "auditor", "");
  AuditReport report;
  if (auditor == "baseline") {
    PairSampler ps = make_sampler(cfg, ds, seed);
    report = baseline_audit(ds, ps, ac);
  } else if (auditor == "lc-counterfactual") {
    report = audit_lc_counterfactual(ds, ac);
  } else if (auditor == "lc-anchor") {
    LcAnchorParams params;
    params.aug_size = static_cast<int>(config_num(cfg, "aug_size", 30.0));
    params.warmup_size = static_cast<int>(config_num(cfg, "warmup", 2.0));
    if (cfg.count("rounds"))
      params.T = static_cast<int>(config_num(cfg, "rounds", 0.0));
    report = audit_lc_anchor(ds, ac, params);
  } else if (auditor == "et-counterfactual") {
    report = audit_et_counterfactual(ds, ac);
  } else if (auditor == "et-anchor") {
    report = audit_et_anchor(ds, ac);
  } else if (auditor == "general") {
    report = run_general(cfg, ds, ac, seed);
  } else {
    throw config_error("config key 'auditor' must be one of baseline, "
                       "lc-counterfactual, lc-anchor, et-counterfactual, "
                       "et-anchor, general");
  }

  std::cout << report_text(report);
  if (!out_path.empty())
    write_text(out_path, serialize_transcript(report.transcript));
  return 0;
}

int cmd_experiment_anchor_aug(const ConfigMap& cfg,
                              std::optional<std::uint64_t> seed_opt,
                              const std::string& out_path) {
  AnchorAugConfig ec;
  ec.d = static_cast<int>(config_num(cfg, "d", ec.d));
  ec.max_budget = static_cast<int>(config_num(cfg, "max_budget", ec.max_budget));
  ec.aug_size = static_cast<int>(config_num(cfg, "aug_size", ec.aug_size));
  ec.anchor_side = config_num(cfg, "anchor_side", ec.anchor_side);
  ec.seeds = static_cast<int>(config_num(cfg, "seeds", ec.seeds));
  ec.base_seed = effective_seed(cfg, seed_opt);

  const Table t = run_anchor_aug_experiment(ec);
  const std::string fmt = config_str(cfg, "format", "csv");
  if (out_path.empty()) {
    std::cout << table_to_csv(t);
  } else {
    emit_report(t, fmt == "svg" ? ReportFormat::Svg : ReportFormat::Csv,
                out_path);
  }
  return 0;
}

int cmd_experiment_aqc(const ConfigMap& cfg,
                       std::optional<std::uint64_t> seed_opt,
                       const std::string& out_path) {
  AqcConfig ec;
  if (cfg.count("gaps")) ec.gaps = parse_list(cfg.at("gaps"), "gaps");
  ec.placements = static_cast<int>(config_num(cfg, "placements", ec.placements));
  ec.epsilon = config_num(cfg, "epsilon", ec.epsilon);
  ec.base_seed = effective_seed(cfg, seed_opt);

  const Table t = run_aqc_experiment(ec);
  const std::string fmt = config_str(cfg, "format", "csv");
  if (out_path.empty()) {
    std::cout << table_to_csv(t);
  } else {
    emit_report(t, fmt == "svg" ? ReportFormat::Svg : ReportFormat::Csv,
                out_path);
  }
  return 0;
}

int cmd_verify(const ConfigMap& cfg, std::optional<std::uint64_t> seed_opt,
               const std::string& out_path) {
  const std::uint64_t seed = effective_seed(cfg, seed_opt);
  DsOracle ds = make_ds(cfg, seed);
  const LabelOracle oracle = [&ds](const Vec& x) { return predict(ds.h, x); };

  const std::string check = config_str(cfg, "check", "");
  const int n = static_cast<int>(config_num(cfg, "n", 2000.0));
  const double delta_gap = config_num(cfg, "delta_gap", 0.05);
  const Vec x = parse_vec(config_str(cfg, "x", "0"), "x");
  const Response resp = ds_respond(ds, Query{x});

  std::ostringstream out;
  bool flagged = false;
  if (check == "precision" || check == "coverage") {
    if (!std::holds_alternative<AnchorRegion>(resp.explanation))
      throw config_error("verify: DS returned no anchor; set method=anchor");
    const auto& a = std::get<AnchorRegion>(resp.explanation);
    // claim_inflation models a DS overstating its explanation's quality.
    const double lie = config_num(cfg, "claim_inflation", 0.0);
    Verdict v;
    if (check == "precision") {
      v = verify_anchor_precision(a, a.tau + lie, resp.label, oracle, n,
                                  delta_gap, derive_seed(seed, "verify"));
    } else {
      CoverageReference ref;
      const int rd = a.kind == AnchorRegion::Kind::Box
                         ? static_cast<int>(a.lower.size())
                         : 1;
      ref.lo = Vec::Constant(rd, config_num(cfg, "ref_lo", -1.0));
      ref.hi = Vec::Constant(rd, config_num(cfg, "ref_hi", 1.0));
      ref.exact = config_num(cfg, "exact", 1.0) != 0.0;
      v = verify_anchor_coverage(a, a.coverage + lie, ref, n, delta_gap,
                                 derive_seed(seed, "verify"));
    }
    flagged = v.flagged();
    out << "check=" << check << "\n"
        << "status=" << (flagged ? "Flagged" : "Consistent") << "\n"
        << "estimate=" << format_g17(v.estimate) << "\n"
        << "bound=" << format_g17(v.bound) << "\n";
  } else if (check == "counterfactual") {
    if (!std::holds_alternative<CounterfactualPoint>(resp.explanation))
      throw config_error(
          "verify: DS returned no counterfactual; set method=counterfactual");
    Vec claimed = std::get<CounterfactualPoint>(resp.explanation).x_prime;
    if (cfg.count("claimed"))
      claimed = parse_vec(cfg.at("claimed"), "claimed");  // a lying DS
    const int k_iters = static_cast<int>(config_num(cfg, "k_iters", 10.0));
    const int n_per_iter =
        static_cast<int>(config_num(cfg, "n_per_iter", 200.0));
    const auto chk = verify_counterfactual(x, claimed, resp.label, oracle,
                                           k_iters, n_per_iter,
                                           derive_seed(seed, "verify"));
    flagged = !chk.label_ok || chk.improved.has_value();
    out << "check=counterfactual\n"
        << "status=" << (flagged ? "Flagged" : "Consistent") << "\n"
        << "label_ok=" << (chk.label_ok ? 1 : 0) << "\n"
        << "improved=" << (chk.improved ? 1 : 0) << "\n"
        << "final_radius=" << format_g17(chk.final_radius) << "\n"
        << "oracle_queries=" << chk.oracle_queries << "\n";
  } else {
    throw config_error(
        "config key 'check' must be precision, coverage, or counterfactual");
  }

  if (flagged) {
    const std::string policy =
        config_str(cfg, "flag_policy", "fallback-baseline");
    out << "flag_policy=" << policy << "\n";
    if (policy == "fallback-baseline") {
      AuditConfig ac = make_audit_config(cfg, seed);
      PairSampler ps = make_sampler(cfg, ds, seed);
      ds.method = ExplanationMethod::None;
      const AuditReport fb = baseline_audit(ds, ps, ac);
      out << "fallback." << "decision="
          << (fb.decision == AuditReport::Decision::Yes ? "Yes" : "No") << "\n"
          << "fallback.queries_used=" << fb.queries_used << "\n";
    } else if (policy != "stop" && policy != "audit-with-estimates") {
      throw config_error("unknown flag_policy '" + policy + "'");
    }
  }

  std::cout << out.str();
  if (!out_path.empty()) write_text(out_path, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-sensitivity auditing with explanation-aided queries"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed_value = 0;
  bool seed_given = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Key = value config file")
        ->required();
    sub->add_option("--seed", seed_value, "Override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--out", out_path, "Output file path");
  };

  auto* audit = app.add_subcommand("audit", "Run one auditor against a DS");
  add_common(audit);
  auto* experiment = app.add_subcommand("experiment", "Batch experiments");
  experiment->require_subcommand(1);
  auto* anchor_aug = experiment->add_subcommand(
      "anchor-aug", "Anchor-augmented weight estimation curves");
  add_common(anchor_aug);
  auto* aqc = experiment->add_subcommand(
      "aqc", "Average query count versus threshold gap");
  add_common(aqc);
  auto* verify =
      app.add_subcommand("verify", "Check explanations from an untruthful DS");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const ConfigMap cfg = load_config(config_path);
    const std::optional<std::uint64_t> seed_opt =
        seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
    if (audit->parsed()) return cmd_audit(cfg, seed_opt, out_path);
    if (anchor_aug->parsed())
      return cmd_experiment_anchor_aug(cfg, seed_opt, out_path);
    if (aqc->parsed()) return cmd_experiment_aqc(cfg, seed_opt, out_path);
    if (verify->parsed()) return cmd_verify(cfg, seed_opt, out_path);
    return 1;
  } catch (const untruthful_ds_error& e) {
    std::cerr << "untruthful DS: " << e.what() << "\n";
    return 2;
  } catch (const protocol_error& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
