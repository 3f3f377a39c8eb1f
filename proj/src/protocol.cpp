// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#include "xaudit/protocol.hpp"

#include <cmath>
#include <sstream>

namespace xaudit {

namespace {

std::string render_vec(const Vec& x) {
  std::string out;
  for (int i = 0; i < x.size(); ++i) {
    if (i > 0) out += ',';
    out += format_g17(x[i]);
  }
  return out;
}

// RNG stream for everything random about one response.
std::uint64_t query_seed(const DsOracle& oracle, const Vec& x) {
  return derive_seed(oracle.seed, render_vec(x));
}

}  // namespace

Response ds_respond(const DsOracle& oracle, const Query& q) {
  if (!q.x.allFinite()) throw protocol_error("ds_respond: non-finite query");
  Response r;
  if (const auto* lc = std::get_if<LinearClassifier>(&oracle.h)) {
    if (q.x.size() != lc->dim())
      throw protocol_error("ds_respond: query dimension mismatch");
    r.label = lc->predict(q.x);
    switch (oracle.method) {
      case ExplanationMethod::None:
        break;
      case ExplanationMethod::Counterfactual: {
        const double gamma =
            oracle.gamma > 0.0 ? oracle.gamma : default_gamma(q.x);
        r.explanation = counterfactual_lc(*lc, q.x, gamma);
        break;
      }
      case ExplanationMethod::Anchor:
        r.explanation =
            anchor_lc(*lc, q.x, oracle.anchor_mode, query_seed(oracle, q.x));
        break;
    }
    return r;
  }

  const auto& et = std::get<ExtendedThreshold>(oracle.h);
  if (q.x.size() != 2)
    throw protocol_error("ds_respond: expected a (v, g) query");
  if (q.x[1] != 0.0 && q.x[1] != 1.0)
    throw protocol_error("ds_respond: g must be exactly 0 or 1");
  const int g = static_cast<int>(q.x[1]);
  const double v = q.x[0];
  r.label = et.predict(v, g);
  switch (oracle.method) {
    case ExplanationMethod::None:
      break;
    case ExplanationMethod::Counterfactual:
      r.explanation = counterfactual_et(et, v, g);
      break;
    case ExplanationMethod::Anchor:
      r.explanation = anchor_et(et, v, g, oracle.et_anchor_len);
      break;
  }
  return r;
}

void AuditConfig::validate() const {
  if (!(epsilon >= 0.0) || !(epsilon <= 1.0))
    throw config_error("AuditConfig: epsilon must be in [0, 1]");
  if (!(delta >= 0.0) || !(delta <= 1.0))
    throw config_error("AuditConfig: delta must be in [0, 1]");
  if (budget && *budget < 0) throw config_error("AuditConfig: negative budget");
  if (!(tolerance > 0.0)) throw config_error("AuditConfig: tolerance must be > 0");
}

const Response& Session::ask(const Vec& x) {
  if (!can_ask())
    throw protocol_error("session: query budget exhausted");
  transcript_.entries.emplace_back(Query{x}, ds_respond(*ds_, Query{x}));
  return transcript_.entries.back().second;
}

AuditReport run_session(const AuditorStrategy& strategy, const DsOracle& ds,
                        const AuditConfig& cfg) {
  cfg.validate();
  AuditReport report = strategy(ds, cfg);
  if (report.queries_used != report.transcript.size())
    throw protocol_error("run_session: report query count mismatch");
  if (cfg.budget && report.queries_used > *cfg.budget)
    throw protocol_error("run_session: budget exceeded");
  return report;
}

std::string serialize_transcript(const Transcript& t) {
  std::ostringstream out;
  for (int i = 0; i < t.size(); ++i) {
    const auto& [q, r] = t.entries[i];
    out << (i + 1) << ',' << render_vec(q.x) << ',' << r.label << ',';
    if (std::holds_alternative<std::monostate>(r.explanation)) {
      out << "none";
    } else if (const auto* cf = std::get_if<CounterfactualPoint>(&r.explanation)) {
      out << "counterfactual," << render_vec(cf->x_prime);
    } else {
      const auto& a = std::get<AnchorRegion>(r.explanation);
      switch (a.kind) {
        case AnchorRegion::Kind::Box:
          out << "box," << render_vec(a.lower) << ',' << render_vec(a.upper);
          break;
        case AnchorRegion::Kind::Ray:
          out << "ray," << render_vec(a.direction);
          break;
        case AnchorRegion::Kind::Interval:
          out << "interval," << format_g17(a.lo) << ',' << format_g17(a.hi)
              << ',' << a.g;
          break;
      }
      out << ',' << format_g17(a.tau) << ',' << format_g17(a.coverage);
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double field_num(const std::vector<std::string>& f, std::size_t i) {
  if (i >= f.size()) throw protocol_error("parse_transcript: truncated line");
  try {
    std::size_t pos = 0;
    const double v = std::stod(f[i], &pos);
    if (pos != f[i].size()) throw std::invalid_argument(f[i]);
    return v;
  } catch (const std::exception&) {
    throw protocol_error("parse_transcript: bad number '" + f[i] + "'");
  }
}

Vec read_vec(const std::vector<std::string>& f, std::size_t start, int d) {
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = field_num(f, start + i);
  return x;
}

// Query dimension from the line shape; the kind fixes the payload length.
int infer_dim(const std::vector<std::string>& f) {
  const auto n = f.size();
  for (std::size_t k = 2; k < n; ++k) {
    const std::string& kind = f[k];
    const int d = static_cast<int>(k) - 2;  // fields between t,label and kind
    if (d < 1) continue;
    if (kind == "none" && n == k + 1) return d;
    if (kind == "counterfactual" && n == k + 1 + static_cast<std::size_t>(d))
      return d;
    if (kind == "box" && n == k + 3 + 2 * static_cast<std::size_t>(d)) return d;
    if (kind == "ray" && n == k + 3 + static_cast<std::size_t>(d)) return d;
    if (kind == "interval" && n == k + 6 && d == 2) return d;
  }
  throw protocol_error("parse_transcript: unrecognized line shape");
}

}  // namespace

Transcript parse_transcript(const std::string& text) {
  Transcript t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    const int d = infer_dim(f);
    Query q{read_vec(f, 1, d)};
    Response r;
    r.label = static_cast<int>(field_num(f, 1 + static_cast<std::size_t>(d)));
    if (r.label != 1 && r.label != -1)
      throw protocol_error("parse_transcript: label must be +1 or -1");
    const std::size_t k = 2 + static_cast<std::size_t>(d);
    const std::string& kind = f[k];
    if (kind == "none") {
      // no payload
    } else if (kind == "counterfactual") {
      r.explanation = CounterfactualPoint{read_vec(f, k + 1, d)};
    } else if (kind == "box") {
      AnchorRegion a;
      a.kind = AnchorRegion::Kind::Box;
      a.lower = read_vec(f, k + 1, d);
      a.upper = read_vec(f, k + 1 + static_cast<std::size_t>(d), d);
      a.tau = field_num(f, k + 1 + 2 * static_cast<std::size_t>(d));
      a.coverage = field_num(f, k + 2 + 2 * static_cast<std::size_t>(d));
      r.explanation = a;
    } else if (kind == "ray") {
      AnchorRegion a;
      a.kind = AnchorRegion::Kind::Ray;
      a.direction = read_vec(f, k + 1, d);
      a.tau = field_num(f, k + 1 + static_cast<std::size_t>(d));
      a.coverage = field_num(f, k + 2 + static_cast<std::size_t>(d));
      r.explanation = a;
    } else if (kind == "interval") {
      AnchorRegion a;
      a.kind = AnchorRegion::Kind::Interval;
      a.lo = field_num(f, k + 1);
      a.hi = field_num(f, k + 2);
      a.g = static_cast<int>(field_num(f, k + 3));
      a.tau = field_num(f, k + 4);
      a.coverage = field_num(f, k + 5);
      r.explanation = a;
    } else {
      throw protocol_error("parse_transcript: unknown explanation kind");
    }
    t.entries.emplace_back(std::move(q), std::move(r));
  }
  return t;
}

}  // namespace xaudit
