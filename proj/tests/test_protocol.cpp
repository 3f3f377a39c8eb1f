// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "doctest.h"
#include "xaudit/auditors.hpp"
#include "xaudit/protocol.hpp"

using namespace xaudit;

namespace {

Vec make_vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

DsOracle lc_oracle(std::initializer_list<double> w, double b,
                   ExplanationMethod method) {
  LinearClassifier lc;
  lc.w = make_vec(w);
  lc.b = b;
  DsOracle ds;
  ds.h = lc;
  ds.method = method;
  return ds;
}

DsOracle et_oracle(double t1, double t2, ExplanationMethod method) {
  ExtendedThreshold et;
  et.theta1 = t1;
  et.theta2 = t2;
  DsOracle ds;
  ds.h = et;
  ds.method = method;
  return ds;
}

}  // namespace

TEST_CASE("ds responses carry the requested explanation") {
  const DsOracle plain = lc_oracle({1.0, 0.0}, 0.0, ExplanationMethod::None);
  Response r = ds_respond(plain, Query{make_vec({2.0, 0.0})});
  CHECK(r.label == +1);
  CHECK(std::holds_alternative<std::monostate>(r.explanation));

  const DsOracle cf =
      lc_oracle({1.0, 0.0}, 0.0, ExplanationMethod::Counterfactual);
  r = ds_respond(cf, Query{make_vec({2.0, 0.0})});
  const auto& xp = std::get<CounterfactualPoint>(r.explanation).x_prime;
  CHECK(xp[0] == doctest::Approx(-2e-6).epsilon(1e-9));
  CHECK(xp[1] == 0.0);

  const DsOracle etc = et_oracle(0.3, 0.6, ExplanationMethod::Counterfactual);
  r = ds_respond(etc, Query{make_vec({-1.0, 0.0})});
  CHECK(r.label == -1);
  const auto& exp = std::get<CounterfactualPoint>(r.explanation).x_prime;
  CHECK(exp[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(exp[1] == 0.0);

  DsOracle eta = et_oracle(0.3, 0.6, ExplanationMethod::Anchor);
  eta.et_anchor_len = 0.2;
  r = ds_respond(eta, Query{make_vec({0.5, 0.0})});
  const auto& a = std::get<AnchorRegion>(r.explanation);
  CHECK(a.kind == AnchorRegion::Kind::Interval);
  CHECK(a.lo == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.hi == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("ds rejects malformed queries") {
  const DsOracle ds = lc_oracle({1.0, 0.0, 0.0}, 0.0, ExplanationMethod::None);
  CHECK_THROWS_AS(ds_respond(ds, Query{make_vec({1.0, 2.0})}), protocol_error);

  const DsOracle et = et_oracle(0.0, 0.5, ExplanationMethod::None);
  CHECK_THROWS_AS(ds_respond(et, Query{make_vec({0.1, 0.5})}), protocol_error);
  CHECK_THROWS_AS(ds_respond(et, Query{make_vec({0.1, 2.0})}), protocol_error);
  CHECK_THROWS_AS(ds_respond(et, Query{make_vec({0.1})}), protocol_error);

  Vec bad = make_vec({0.0, 0.0, 0.0});
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ds_respond(ds, Query{bad}), protocol_error);
}

TEST_CASE("ds responses are truthful and order-independent") {
  DsOracle ds = lc_oracle({0.6, -0.8}, 0.0, ExplanationMethod::Anchor);
  ds.seed = 99;
  ds.anchor_mode.worst_case = false;
  ds.anchor_mode.volume = 0.1;

  const auto& lc = std::get<LinearClassifier>(ds.h);
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const Vec x = 2.0 * rng.ball_point(2);
    CHECK(ds_respond(ds, Query{x}).label == lc.predict(x));
  }

  // Responses keyed by the query, not by conversation position: asking in
  // either order serializes identically.
  const Vec q1 = make_vec({0.5, 0.25});
  const Vec q2 = make_vec({-0.75, 0.125});
  Session s12(ds, std::nullopt);
  s12.ask(q1);
  s12.ask(q2);
  Session s21(ds, std::nullopt);
  s21.ask(q2);
  s21.ask(q1);
  Transcript t12 = s12.take_transcript();
  Transcript t21 = s21.take_transcript();
  std::swap(t21.entries[0], t21.entries[1]);
  CHECK(serialize_transcript(t12) == serialize_transcript(t21));
}

TEST_CASE("sessions enforce the query budget") {
  const DsOracle ds = lc_oracle({1.0, 1.0}, 0.0, ExplanationMethod::None);
  Session s(ds, 2);
  CHECK(s.can_ask());
  CHECK(s.can_ask(2));
  CHECK_FALSE(s.can_ask(3));
  s.ask(make_vec({1.0, 0.0}));
  s.ask(make_vec({0.0, 1.0}));
  CHECK_FALSE(s.can_ask());
  CHECK_THROWS_AS(s.ask(make_vec({1.0, 1.0})), protocol_error);
  CHECK(s.queries() == 2);

  Session unbounded(ds, std::nullopt);
  for (int i = 0; i < 64; ++i) unbounded.ask(make_vec({1.0, double(i)}));
  CHECK(unbounded.queries() == 64);
}

TEST_CASE("audit config validation") {
  AuditConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epsilon = -0.1;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg.epsilon = 0.05;
  cfg.delta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg.delta = 0.05;
  cfg.budget = -1;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg.budget = 0;
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg.tolerance = 1e-9;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.feature(5) == 4);
  cfg.feature_of_interest = 2;
  CHECK(cfg.feature(5) == 2);
}

TEST_CASE("run_session wraps strategies and audits their bookkeeping") {
  const DsOracle cf =
      lc_oracle({1.0, 0.5}, 0.0, ExplanationMethod::Counterfactual);
  AuditConfig cfg;

  AuditReport r = run_session(
      [](const DsOracle& ds, const AuditConfig& c) {
        return audit_lc_counterfactual(ds, c);
      },
      cf, cfg);
  CHECK(r.queries_used == 1);
  CHECK(r.transcript.size() == 1);

  const DsOracle et = et_oracle(0.1, 0.4, ExplanationMethod::Counterfactual);
  r = run_session(
      [](const DsOracle& ds, const AuditConfig& c) {
        return audit_et_counterfactual(ds, c);
      },
      et, cfg);
  CHECK(r.queries_used == 2);

  // Zero budget: the strategy reports exhaustion without asking.
  AuditConfig zero = cfg;
  zero.budget = 0;
  r = run_session(
      [](const DsOracle& ds, const AuditConfig& c) {
        return audit_lc_counterfactual(ds, c);
      },
      cf, zero);
  CHECK(r.exhausted);
  CHECK(r.queries_used == 0);

  // A strategy whose query count disagrees with its transcript is rejected.
  CHECK_THROWS_AS(run_session(
                      [](const DsOracle&, const AuditConfig&) {
                        AuditReport lie;
                        lie.queries_used = 5;
                        return lie;
                      },
                      cf, cfg),
                  protocol_error);
}

TEST_CASE("transcripts round-trip through text") {
  DsOracle ds = lc_oracle({0.8, -0.6}, 0.0, ExplanationMethod::None);
  ds.seed = 5;
  Session s(ds, std::nullopt);
  s.ask(make_vec({0.5, 0.25}));

  DsOracle cf = ds;
  cf.method = ExplanationMethod::Counterfactual;
  Session s2(cf, std::nullopt);
  s2.ask(make_vec({0.5, 0.25}));

  DsOracle ray = ds;
  ray.method = ExplanationMethod::Anchor;
  Session s3(ray, std::nullopt);
  s3.ask(make_vec({0.5, 0.25}));

  DsOracle box = ray;
  box.anchor_mode.worst_case = false;
  box.anchor_mode.volume = 0.2;
  Session s4(box, std::nullopt);
  s4.ask(make_vec({0.5, 0.25}));

  DsOracle iv = et_oracle(0.2, 0.5, ExplanationMethod::Anchor);
  Session s5(iv, std::nullopt);
  s5.ask(make_vec({0.5, 1.0}));

  Transcript all;
  for (Session* sess : {&s, &s2, &s3, &s4, &s5}) {
    for (auto& e : sess->take_transcript().entries)
      all.entries.push_back(std::move(e));
  }
  const std::string text = serialize_transcript(all);
  const Transcript back = parse_transcript(text);
  REQUIRE(back.size() == all.size());
  CHECK(serialize_transcript(back) == text);  // byte-stable round trip

  for (int i = 0; i < all.size(); ++i) {
    const auto& [q0, r0] = all.entries[static_cast<std::size_t>(i)];
    const auto& [q1, r1] = back.entries[static_cast<std::size_t>(i)];
    CHECK((q0.x - q1.x).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(r0.label == r1.label);
    CHECK(r0.explanation.index() == r1.explanation.index());
  }
}

TEST_CASE("transcript parsing rejects malformed lines") {
  CHECK_THROWS_AS(parse_transcript("1,0.5,1,unknown\n"), protocol_error);
  CHECK_THROWS_AS(parse_transcript("1,0.5,2,none\n"), protocol_error);
  CHECK_THROWS_AS(parse_transcript("1,0.5\n"), protocol_error);
  CHECK_THROWS_AS(parse_transcript("1,abc,1,none\n"), protocol_error);
  CHECK(parse_transcript("").size() == 0);
  const Transcript one = parse_transcript("1,0.5,1,none\n");
  REQUIRE(one.size() == 1);
  CHECK(one.entries[0].first.x.size() == 1);
  CHECK(one.entries[0].second.label == +1);
}
