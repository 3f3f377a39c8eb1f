// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "xaudit/harness.hpp"

using namespace xaudit;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/xaudit_" + name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("csv matrices load with header and constant-column report") {
  const auto path = write_temp("ok.csv", "a,b\n1,2\n3,4\n");
  const DataMatrix m = load_matrix_csv(path);
  REQUIRE(m.names.size() == 2);
  CHECK(m.names[0] == "a");
  CHECK(m.names[1] == "b");
  REQUIRE(m.rows.rows() == 2);
  REQUIRE(m.rows.cols() == 2);
  CHECK(m.rows(0, 0) == 1.0);
  CHECK(m.rows(1, 1) == 4.0);
  CHECK(m.constant_columns.empty());

  const auto cpath = write_temp("const.csv", "u,v\n1,5\n1,7\n1,9\n");
  CHECK(load_matrix_csv(cpath).constant_columns == std::vector<int>{0});

  // All-numeric first line means the header is missing, not optional.
  const auto hpath = write_temp("nohdr.csv", "1,2\n3,4\n");
  CHECK_THROWS_WITH_AS(load_matrix_csv(hpath),
                       doctest::Contains("missing header"), config_error);

  const auto bpath = write_temp("bad.csv", "a,b\n1,2\n3,oops\n");
  CHECK_THROWS_WITH_AS(load_matrix_csv(bpath), doctest::Contains("row 3"),
                       config_error);

  // Non-finite cells are rejected even though strtod accepts them.
  const auto npath = write_temp("nan.csv", "a,b\n1,nan\n");
  CHECK_THROWS_AS(load_matrix_csv(npath), config_error);

  const auto rpath = write_temp("ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(load_matrix_csv(rpath), config_error);

  CHECK_THROWS_AS(load_matrix_csv("/nonexistent/nope.csv"), config_error);
}

TEST_CASE("synthetic oracles from spec strings") {
  const DsOracle zero = synthesize_ds("lc d=5 ws=0", 11);
  const auto& lcz = std::get<LinearClassifier>(zero.h);
  REQUIRE(lcz.dim() == 5);
  CHECK(lcz.w[4] == 0.0);
  CHECK(lcz.w.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lcz.b == 0.0);

  // Same spec and seed reproduce the same weights.
  const DsOracle a = synthesize_ds("lc d=3", 4);
  const DsOracle b = synthesize_ds("lc d=3", 4);
  CHECK((std::get<LinearClassifier>(a.h).w - std::get<LinearClassifier>(b.h).w)
            .norm() == 0.0);
  CHECK((std::get<LinearClassifier>(a.h).w -
         std::get<LinearClassifier>(synthesize_ds("lc d=3", 5).h).w)
            .norm() != 0.0);

  // wsmin/wsmax pin |w_s| relative to the unit non-interest block; wsmax
  // defaults to wsmin.
  const DsOracle pinned = synthesize_ds("lc d=6 wsmin=0.3 wsmax=0.3", 2);
  const auto& lcr = std::get<LinearClassifier>(pinned.h);
  CHECK(std::abs(lcr.w[5]) / lcr.w.head(5).norm() ==
        doctest::Approx(0.3).epsilon(1e-12));
  const DsOracle single = synthesize_ds("lc d=4 wsmin=0.5", 1);
  const auto& lcs = std::get<LinearClassifier>(single.h);
  CHECK(std::abs(lcs.w[3]) / lcs.w.head(3).norm() ==
        doctest::Approx(0.5).epsilon(1e-12));

  const DsOracle expl = synthesize_ds("et theta1=0.2 theta2=-0.3", 1);
  const auto& et = std::get<ExtendedThreshold>(expl.h);
  CHECK(et.theta1 == 0.2);
  CHECK(et.theta2 == -0.3);

  const DsOracle gapped = synthesize_ds("et gap=0.5", 9);
  const auto& etg = std::get<ExtendedThreshold>(gapped.h);
  CHECK(std::abs(etg.theta1 - etg.theta2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(etg.theta1 >= etg.lo);
  CHECK(etg.theta2 <= etg.hi);

  CHECK_THROWS_AS(synthesize_ds("", 1), config_error);
  CHECK_THROWS_AS(synthesize_ds("lc d=1", 1), config_error);
  CHECK_THROWS_AS(synthesize_ds("lc d=4 junk", 1), config_error);
  CHECK_THROWS_AS(synthesize_ds("lc d=4 wsmin=0.5 wsmax=0.2", 1), config_error);
  CHECK_THROWS_AS(synthesize_ds("lc d=4 wsmin=-0.1", 1), config_error);
  CHECK_THROWS_AS(synthesize_ds("et gap=3", 1), config_error);
  CHECK_THROWS_AS(synthesize_ds("et lo=1 hi=0", 1), config_error);
  CHECK_THROWS_AS(synthesize_ds("svm d=4", 1), config_error);
}

TEST_CASE("config files parse into key-value maps") {
  const auto cfg = parse_config("a = 1\n# note\nb=two\n\nc = 3.5\n");
  CHECK(cfg.size() == 3);
  CHECK(cfg.at("a") == "1");
  CHECK(cfg.at("b") == "two");
  CHECK(cfg.at("c") == "3.5");

  CHECK(config_num(cfg, "a", -1.0) == 1.0);
  CHECK(config_num(cfg, "missing", -1.0) == -1.0);
  CHECK(config_str(cfg, "b", "x") == "two");
  CHECK(config_str(cfg, "missing", "x") == "x");
  CHECK_THROWS_AS(config_num(cfg, "b", 0.0), config_error);

  CHECK_THROWS_WITH_AS(parse_config("justakey\n"), doctest::Contains("line 1"),
                       config_error);
  CHECK_THROWS_WITH_AS(parse_config("ok=1\n=value\n"),
                       doctest::Contains("line 2"), config_error);

  const auto path = write_temp("conf.cfg", "x = 7\n");
  CHECK(config_num(load_config(path), "x", 0.0) == 7.0);
  CHECK_THROWS_AS(load_config("/nonexistent/nope.cfg"), config_error);
}

TEST_CASE("worst-case ray augmentation cannot change the trajectory") {
  Rng rng(21);
  LinearClassifier target;
  target.w = rng.unit_vector(5);

  const LearningRun plain = anchor_learning_run(target, 40, AugMode::None, 0, 0.4, 6);
  const LearningRun rays =
      anchor_learning_run(target, 40, AugMode::WorstCase, 30, 0.4, 6);
  REQUIRE(plain.errors.size() == 40);
  REQUIRE(rays.errors.size() == 40);
  for (std::size_t i = 0; i < 40; ++i) CHECK(plain.errors[i] == rays.errors[i]);
  CHECK((plain.final_ellipsoid.mu - rays.final_ellipsoid.mu).norm() == 0.0);

  // Learning actually happens.
  CHECK(plain.errors.back() < 0.5 * plain.errors.front());

  const LearningRun typical =
      anchor_learning_run(target, 40, AugMode::Typical, 30, 0.4, 6);
  CHECK(typical.errors.size() == 40);
  CHECK(typical.errors.back() < 0.5);

  LinearClassifier biased = target;
  biased.b = 0.2;
  CHECK_THROWS_AS(anchor_learning_run(biased, 10, AugMode::None, 0, 0.4, 6),
                  config_error);
}

TEST_CASE("anchor augmentation experiment emits a paired table") {
  AnchorAugConfig cfg;
  cfg.d = 4;
  cfg.max_budget = 12;
  cfg.aug_size = 5;
  cfg.seeds = 3;
  cfg.base_seed = 7;

  const Table t = run_anchor_aug_experiment(cfg);
  REQUIRE(t.columns ==
          std::vector<std::string>{"query_count", "mode", "mean_error",
                                   "std_error"});
  REQUIRE(t.rows.size() == 24);  // 12 budgets x 2 modes
  int worst = 0, typical = 0;
  for (const auto& row : t.rows) {
    REQUIRE(row.size() == 4);
    if (row[1] == "worst_case") ++worst;
    if (row[1] == "typical") ++typical;
    CHECK(std::stod(row[2]) >= 0.0);
    CHECK(std::stod(row[3]) >= 0.0);
  }
  CHECK(worst == 12);
  CHECK(typical == 12);

  // Byte-reproducible.
  CHECK(table_to_csv(run_anchor_aug_experiment(cfg)) == table_to_csv(t));
}

TEST_CASE("anchor query complexity experiment") {
  AqcConfig cfg;
  cfg.gaps = {0.05, 0.8};
  cfg.placements = 10;
  cfg.base_seed = 3;

  const Table t = run_aqc_experiment(cfg);
  REQUIRE(t.columns ==
          std::vector<std::string>{"gap", "method", "mean_queries"});
  REQUIRE(t.rows.size() == 4);
  double anchor_small = 0.0, anchor_big = 0.0;
  for (const auto& row : t.rows) {
    if (row[1] == "counterfactual") {
      // The two-query recovery never varies.
      CHECK(row[2] == "2");
    } else {
      REQUIRE(row[1] == "anchor");
      (std::stod(row[0]) < 0.4 ? anchor_small : anchor_big) =
          std::stod(row[2]);
    }
  }
  // Wider gaps separate at coarser midpoints.
  CHECK(anchor_big < anchor_small);

  AqcConfig bad;
  bad.gaps = {0.0};
  CHECK_THROWS_AS(run_aqc_experiment(bad), config_error);
  bad.gaps = {2.5};
  CHECK_THROWS_AS(run_aqc_experiment(bad), config_error);
}

TEST_CASE("csv rendering quotes exactly what needs quoting") {
  Table t;
  t.columns = {"a", "b"};
  t.rows = {{"1", "x,y"}, {"2", "q\"r\""}};
  CHECK(table_to_csv(t) == "a,b\n1,\"x,y\"\n2,\"q\"\"r\"\"\"\n");

  Table ragged = t;
  ragged.rows.push_back({"only-one"});
  CHECK_THROWS_AS(table_to_csv(ragged), config_error);

  Table empty;
  CHECK_THROWS_AS(table_to_csv(empty), config_error);
}

TEST_CASE("svg rendering draws one polyline per series") {
  Table t;
  t.columns = {"x", "series", "y"};
  for (int i = 0; i < 5; ++i) {
    t.rows.push_back({std::to_string(i), "alpha", std::to_string(i * i)});
    t.rows.push_back({std::to_string(i), "beta", std::to_string(10 - i)});
  }
  const std::string svg = table_to_svg(t);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos;
       at = svg.find("<polyline", at + 1))
    ++polylines;
  CHECK(polylines == 2);
  CHECK(svg.find("alpha") != std::string::npos);
  CHECK(svg.find("beta") != std::string::npos);

  Table two;
  two.columns = {"x", "y"};
  two.rows = {{"0", "1"}};
  CHECK_THROWS_AS(table_to_svg(two), config_error);

  Table words;
  words.columns = {"x", "series", "y"};
  words.rows = {{"zero", "s", "1"}};
  CHECK_THROWS_AS(table_to_svg(words), config_error);
}

TEST_CASE("reports land on disk byte-for-byte") {
  Table t;
  t.columns = {"x", "series", "y"};
  t.rows = {{"0", "s", "1"}, {"1", "s", "2"}};

  const std::string cpath = "/tmp/xaudit_report.csv";
  emit_report(t, ReportFormat::Csv, cpath);
  CHECK(slurp(cpath) == table_to_csv(t));

  const std::string spath = "/tmp/xaudit_report.svg";
  emit_report(t, ReportFormat::Svg, spath);
  CHECK(slurp(spath) == table_to_svg(t));

  CHECK_THROWS_AS(emit_report(t, ReportFormat::Csv, "/nonexistent/dir/r.csv"),
                  config_error);
}
