// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xaudit/auditors.hpp"
#include "xaudit/ellipsoid.hpp"
#include "xaudit/protocol.hpp"
#include "xaudit/types.hpp"
#include "xaudit/verification.hpp"

namespace xaudit {

struct DataMatrix {
  Mat rows;
  std::vector<std::string> names;
  std::vector<int> constant_columns;
};

// Numeric CSV with a mandatory header row. Non-numeric or non-finite cells
// fail with the offending row and column.
DataMatrix load_matrix_csv(const std::string& path);

// Synthetic oracles from a one-line spec:
//   "lc d=20 [ws=0] [wsmin=A wsmax=B] [b=0]"   weights uniform on the sphere
//   "et [gap=G | theta1=T1 theta2=T2] [lo=-1 hi=1]"
// wsmin/wsmax set |w_s| in the scaling where the non-interest block is unit,
// with a random sign. The explanation method is set by the caller.
DsOracle synthesize_ds(const std::string& spec, std::uint64_t seed);

// Key = value lines; '#' starts a comment. Unknown keys are kept (callers
// validate the ones they use).
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> load_config(const std::string& path);

double config_num(const std::map<std::string, std::string>& cfg,
                  const std::string& key, double fallback);
std::string config_str(const std::map<std::string, std::string>& cfg,
                       const std::string& key, const std::string& fallback);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

enum class AugMode { None, WorstCase, Typical };

struct LearningRun {
  std::vector<double> errors;  // sign-aligned unit-normalized ||w - mu/||mu|| ||
  EllipsoidD final_ellipsoid;
  int constraints_used = 0;
  int dropped = 0;
};

// One anchor-augmented learning trajectory against a known target. Typical
// mode augments each query with anchor-box points whose true label matches
// the query's (the relaxed tau < 1 regime), worst-case mode with ray points;
// ray directions duplicate the query constraint and change nothing.
LearningRun anchor_learning_run(const LinearClassifier& target, int budget,
                                AugMode mode, int aug_size, double anchor_side,
                                std::uint64_t seed);

struct AnchorAugConfig {
  int d = 20;
  int max_budget = 130;
  int aug_size = 30;
  double anchor_side = 0.4;
  int seeds = 20;
  std::uint64_t base_seed = 1;
};

// Columns: query_count, mode, mean_error, std_error. Means are over paired
// seeds per mode.
Table run_anchor_aug_experiment(const AnchorAugConfig& cfg);

struct AqcConfig {
  std::vector<double> gaps = {0.05, 0.1, 0.2, 0.4, 0.8};
  int placements = 500;
  double epsilon = 0.0009765625;  // 2^-10, detection floor for the search
  std::uint64_t base_seed = 1;
};

// Columns: gap, method, mean_queries. Methods: counterfactual (always two
// queries) and anchor (binary search until the responsive midpoint).
Table run_aqc_experiment(const AqcConfig& cfg);

enum class ReportFormat { Csv, Svg };

// CSV (RFC-4180-style quoting) or a minimal static SVG line chart, one series
// per value of the table's second column. Deterministic byte output.
void emit_report(const Table& table, ReportFormat format,
                 const std::string& path);

std::string table_to_csv(const Table& table);
std::string table_to_svg(const Table& table);

}  // namespace xaudit
