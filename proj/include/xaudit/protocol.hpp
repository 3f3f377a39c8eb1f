// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "xaudit/explanations.hpp"
#include "xaudit/hypotheses.hpp"
#include "xaudit/types.hpp"

namespace xaudit {

struct Query {
  Vec x;
};

using Explanation = std::variant<std::monostate, CounterfactualPoint, AnchorRegion>;

struct Response {
  int label = 0;
  Explanation explanation;
};

struct Transcript {
  std::vector<std::pair<Query, Response>> entries;

  int size() const { return static_cast<int>(entries.size()); }
};

enum class ExplanationMethod { None, Counterfactual, Anchor };

// Truthful oracle holding h-bar. Responses are deterministic given
// (hypothesis, method, seed, query): anchor sampling draws from an RNG stream
// keyed by the query's canonical rendering, so they do not depend on order.
struct DsOracle {
  Hypothesis h;
  ExplanationMethod method = ExplanationMethod::None;
  std::uint64_t seed = 0;

  AnchorLcMode anchor_mode;        // LC anchors; worst_case by default
  double et_anchor_len = 0.25;     // interval length for ET anchors
  double gamma = -1.0;             // counterfactual push; < 0 means default_gamma(x)

  int dim() const { return hypothesis_dim(h); }
};

Response ds_respond(const DsOracle& oracle, const Query& q);

struct AuditConfig {
  double epsilon = 0.05;
  double delta = 0.05;
  int feature_of_interest = -1;  // -1 means last coordinate
  std::optional<int> budget;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;

  void validate() const;
  int feature(int d) const { return feature_of_interest < 0 ? d - 1 : feature_of_interest; }
};

struct AuditReport {
  enum class Decision { Yes, No };
  Decision decision = Decision::No;
  int queries_used = 0;
  bool exhausted = false;
  std::map<std::string, double> recovered;
  Transcript transcript;
};

// Budget-enforcing wrapper around one oracle conversation.
class Session {
 public:
  Session(const DsOracle& ds, std::optional<int> budget)
      : ds_(&ds), budget_(budget) {}

  bool can_ask(int k = 1) const {
    return !budget_ || transcript_.size() + k <= *budget_;
  }

  const Response& ask(const Vec& x);

  int queries() const { return transcript_.size(); }
  const Transcript& transcript() const { return transcript_; }
  Transcript take_transcript() { return std::move(transcript_); }
  const DsOracle& oracle() const { return *ds_; }

 private:
  const DsOracle* ds_;
  std::optional<int> budget_;
  Transcript transcript_;
};

using AuditorStrategy =
    std::function<AuditReport(const DsOracle&, const AuditConfig&)>;

// Drives one audit conversation and checks the budget invariant.
AuditReport run_session(const AuditorStrategy& strategy, const DsOracle& ds,
                        const AuditConfig& cfg);

// Line format: t,x_1,...,x_d,label,kind,payload...
// kinds: none | counterfactual (x') | box (lo,up,tau,c) | ray (dir,tau,c)
//        | interval (lo,hi,g,tau,c)
// All reals rendered with 17 significant digits for replay determinism.
std::string serialize_transcript(const Transcript& t);
Transcript parse_transcript(const std::string& text);

}  // namespace xaudit
