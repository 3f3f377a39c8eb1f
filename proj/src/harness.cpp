// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#include "xaudit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace xaudit {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    *out = std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

}  // namespace

DataMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("load_matrix_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw config_error("load_matrix_csv: empty file " + path);

  DataMatrix m;
  double ignored;
  bool all_numeric = true;
  for (const auto& cell : split(trim(line), ',')) {
    m.names.push_back(trim(cell));
    all_numeric = all_numeric && parse_double(m.names.back(), &ignored);
  }
  if (m.names.empty() || all_numeric)
    throw config_error("load_matrix_csv: missing header row in " + path);

  const auto cols = m.names.size();
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != cols)
      throw config_error("load_matrix_csv: row " + std::to_string(lineno) +
                         " has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      double v;
      if (!parse_double(trim(cells[c]), &v) || !std::isfinite(v))
        throw config_error("load_matrix_csv: bad cell at row " +
                           std::to_string(lineno) + ", column " + m.names[c]);
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw config_error("load_matrix_csv: no data rows in " + path);

  m.rows = Mat(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          values[r * cols + c];
  for (std::size_t c = 0; c < cols; ++c) {
    const auto col = m.rows.col(static_cast<Eigen::Index>(c));
    if ((col.array() == col[0]).all())
      m.constant_columns.push_back(static_cast<int>(c));
  }
  return m;
}

namespace {

std::map<std::string, std::string> parse_kv_tokens(
    const std::vector<std::string>& tokens, std::size_t start,
    const std::string& what) {
  std::map<std::string, std::string> kv;
  for (std::size_t i = start; i < tokens.size(); ++i) {
    if (tokens[i].empty()) continue;
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos || eq == 0)
      throw config_error(what + ": expected key=value, got '" + tokens[i] + "'");
    kv[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
  }
  return kv;
}

double kv_num(const std::map<std::string, std::string>& kv,
              const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  double v;
  if (!parse_double(it->second, &v))
    throw config_error("bad numeric value for '" + key + "'");
  return v;
}

}  // namespace

DsOracle synthesize_ds(const std::string& spec, std::uint64_t seed) {
  std::vector<std::string> tokens;
  {
    std::istringstream in(spec);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
  }
  if (tokens.empty()) throw config_error("synthesize_ds: empty spec");
  Rng rng(seed);
  DsOracle ds;

  if (tokens[0] == "lc") {
    const auto kv = parse_kv_tokens(tokens, 1, "synthesize_ds");
    const int d = static_cast<int>(kv_num(kv, "d", 0));
    if (d < 2) throw config_error("synthesize_ds: lc needs d >= 2");
    int s = static_cast<int>(kv_num(kv, "s", d - 1));
    if (s < 0 || s >= d) throw config_error("synthesize_ds: s out of range");
    LinearClassifier lc;
    lc.b = kv_num(kv, "b", 0.0);
    if (kv.count("wsmin")) {
      // |w_s| prescribed in the scaling where the non-interest block is unit.
      const double lo = kv_num(kv, "wsmin", 0.0);
      const double hi = kv_num(kv, "wsmax", lo);
      if (!(lo >= 0.0) || hi < lo)
        throw config_error("synthesize_ds: bad wsmin/wsmax");
      const Vec block = rng.unit_vector(d - 1);
      const double mag = rng.uniform(lo, hi);
      const int sgn = rng.uniform01() < 0.5 ? -1 : +1;
      lc.w = Vec(d);
      int j = 0;
      for (int i = 0; i < d; ++i)
        lc.w[i] = i == s ? sgn * mag : block[j++];
      lc.w /= lc.w.norm();
    } else {
      lc.w = rng.unit_vector(d);
      if (kv.count("ws")) {
        if (kv_num(kv, "ws", 0.0) != 0.0)
          throw config_error("synthesize_ds: only ws=0 is supported");
        lc.w[s] = 0.0;
        const double n = lc.w.norm();
        if (!(n > 0.0)) throw config_error("synthesize_ds: degenerate weights");
        lc.w /= n;
      }
    }
    ds.h = lc;
    return ds;
  }

  if (tokens[0] == "et") {
    const auto kv = parse_kv_tokens(tokens, 1, "synthesize_ds");
    ExtendedThreshold et;
    et.lo = kv_num(kv, "lo", -1.0);
    et.hi = kv_num(kv, "hi", 1.0);
    if (!(et.lo < et.hi)) throw config_error("synthesize_ds: need lo < hi");
    if (kv.count("theta1") || kv.count("theta2")) {
      et.theta1 = kv_num(kv, "theta1", et.lo);
      et.theta2 = kv_num(kv, "theta2", et.lo);
    } else {
      const double gap = kv_num(kv, "gap", 0.0);
      if (gap < 0.0 || gap > et.hi - et.lo)
        throw config_error("synthesize_ds: gap out of range");
      const double a = rng.uniform(et.lo, et.hi - gap);
      const bool swap = rng.uniform01() < 0.5;
      et.theta1 = swap ? a + gap : a;
      et.theta2 = swap ? a : a + gap;
    }
    if (et.theta1 < et.lo || et.theta1 > et.hi || et.theta2 < et.lo ||
        et.theta2 > et.hi)
      throw config_error("synthesize_ds: thresholds outside [lo, hi]");
    ds.h = et;
    return ds;
  }

  throw config_error("synthesize_ds: unknown class '" + tokens[0] + "'");
}

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) +
                         ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw config_error("config line " + std::to_string(lineno) + ": empty key");
    cfg[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

double config_num(const std::map<std::string, std::string>& cfg,
                  const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  double v;
  if (!parse_double(it->second, &v))
    throw config_error("config key '" + key + "': bad number '" + it->second +
                       "'");
  return v;
}

std::string config_str(const std::map<std::string, std::string>& cfg,
                       const std::string& key, const std::string& fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

LearningRun anchor_learning_run(const LinearClassifier& target, int budget,
                                AugMode mode, int aug_size, double anchor_side,
                                std::uint64_t seed) {
  if (!target.homogeneous())
    throw config_error("anchor_learning_run: homogeneous targets only");
  const int d = target.dim();
  const Vec w_unit = target.w / target.w.norm();
  Rng rng(seed);
  LabeledSet constraints;
  auto e = EllipsoidD::unit_ball(d);
  LearningRun run;

  const auto record = [&] {
    const double mn = e.mu.norm();
    if (mn <= 1e-15) {
      run.errors.push_back(std::sqrt(2.0));
      return;
    }
    const Vec mu_unit = e.mu / mn;
    run.errors.push_back(
        std::min((w_unit - mu_unit).norm(), (w_unit + mu_unit).norm()));
  };

  const auto augment = [&](const Vec& q, int y, int round) {
    if (mode == AugMode::None || aug_size <= 0) return;
    AnchorRegion a;
    if (mode == AugMode::WorstCase) {
      a.kind = AnchorRegion::Kind::Ray;
      a.direction = q / q.norm();
    } else {
      a.kind = AnchorRegion::Kind::Box;
      a.lower = q.array() - anchor_side / 2.0;
      a.upper = q.array() + anchor_side / 2.0;
    }
    const auto pts = sample_anchor(
        a, aug_size, derive_seed(seed, "aug:" + std::to_string(round)));
    for (const auto& p : pts) {
      // Typical anchors run in the relaxed tau < 1 regime: only points that
      // really share the query's label are added, which the synthesizing side
      // can check directly.
      if (mode == AugMode::Typical && target.predict(p) != y) continue;
      constraints.add(p, y, true);
    }
  };

  int queries = 0;
  Vec warm;
  for (int i = 0; i < 2 && queries < budget; ++i) {
    const Vec q = i % 2 == 0 ? (warm = rng.unit_vector(d)) : Vec(-warm);
    const int y = target.predict(q);
    constraints.add(q, y, false);
    ++queries;
    sweep_once(e, constraints);
    sweep_once(e, constraints);
    record();
  }
  while (queries < budget) {
    const Vec q =
        e.mu.norm() > 1e-12 ? synthesize_query(e) : rng.unit_vector(d);
    const int y = target.predict(q);
    constraints.add(q, y, false);
    augment(q, y, queries);
    ++queries;
    sweep_once(e, constraints);
    sweep_once(e, constraints);
    record();
  }

  run.final_ellipsoid = e;
  run.constraints_used = constraints.size();
  run.dropped = constraints.dropped_count();
  return run;
}

Table run_anchor_aug_experiment(const AnchorAugConfig& cfg) {
  if (cfg.seeds < 1) throw config_error("anchor-aug: seeds must be >= 1");
  Table t;
  t.columns = {"query_count", "mode", "mean_error", "std_error"};

  const std::pair<AugMode, std::string> modes[] = {
      {AugMode::WorstCase, "worst_case"}, {AugMode::Typical, "typical"}};
  for (const auto& [mode, name] : modes) {
    // Per-seed targets and trajectories are paired across modes.
    std::vector<std::vector<double>> errors;
    for (int si = 0; si < cfg.seeds; ++si) {
      const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(si);
      const DsOracle ds =
          synthesize_ds("lc d=" + std::to_string(cfg.d), derive_seed(seed, "target"));
      const auto run = anchor_learning_run(
          std::get<LinearClassifier>(ds.h), cfg.max_budget, mode, cfg.aug_size,
          cfg.anchor_side, derive_seed(seed, "run"));
      errors.push_back(run.errors);
    }
    for (int q = 0; q < cfg.max_budget; ++q) {
      double mean = 0.0;
      for (const auto& e : errors) mean += e[static_cast<std::size_t>(q)];
      mean /= cfg.seeds;
      double var = 0.0;
      for (const auto& e : errors) {
        const double dv = e[static_cast<std::size_t>(q)] - mean;
        var += dv * dv;
      }
      const double sd = cfg.seeds > 1 ? std::sqrt(var / (cfg.seeds - 1)) : 0.0;
      t.rows.push_back({std::to_string(q + 1), name, format_g17(mean),
                        format_g17(sd)});
    }
  }
  return t;
}

Table run_aqc_experiment(const AqcConfig& cfg) {
  if (cfg.placements < 1) throw config_error("aqc: placements must be >= 1");
  Table t;
  t.columns = {"gap", "method", "mean_queries"};
  for (const double gap : cfg.gaps) {
    if (!(gap > 0.0) || gap > 2.0)
      throw config_error("aqc: gaps must lie in (0, 2]");
    double sum_cf = 0.0;
    double sum_anchor = 0.0;
    for (int p = 0; p < cfg.placements; ++p) {
      const std::uint64_t seed =
          derive_seed(cfg.base_seed, "aqc:" + format_g17(gap) + ":" +
                                         std::to_string(p));
      DsOracle ds = synthesize_ds("et gap=" + format_g17(gap), seed);
      AuditConfig ac;
      ac.epsilon = cfg.epsilon;
      ac.seed = seed;

      ds.method = ExplanationMethod::Counterfactual;
      sum_cf += audit_et_counterfactual(ds, ac).queries_used;
      ds.method = ExplanationMethod::Anchor;
      sum_anchor += audit_et_anchor(ds, ac).queries_used;
    }
    t.rows.push_back({format_g17(gap), "counterfactual",
                      format_g17(sum_cf / cfg.placements)});
    t.rows.push_back({format_g17(gap), "anchor",
                      format_g17(sum_anchor / cfg.placements)});
  }
  return t;
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

std::string table_to_csv(const Table& table) {
  if (table.columns.empty()) throw config_error("emit_report: empty table");
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_cell(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw config_error("emit_report: ragged table row");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

// Line chart of column 2 against column 0, one polyline per distinct value of
// column 1, in first-appearance order. Everything is emitted with fixed
// formatting so identical tables render to identical bytes.
std::string table_to_svg(const Table& table) {
  if (table.columns.size() < 3 || table.rows.empty())
    throw config_error("emit_report: svg needs x, series, y columns");

  struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool first = true;
  for (const auto& row : table.rows) {
    double x, y;
    if (!parse_double(row[0], &x) || !parse_double(row[2], &y))
      throw config_error("emit_report: svg cells must be numeric");
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const Series& s) { return s.name == row[1]; });
    if (it == series.end()) {
      series.push_back({row[1], {}});
      it = series.end() - 1;
    }
    it->pts.emplace_back(x, y);
    if (first) {
      x_lo = x_hi = x;
      y_lo = y_hi = y;
      first = false;
    } else {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;

  const double w = 640, h = 420, ml = 64, mr = 24, mt = 24, mb = 48;
  const auto px = [&](double x) {
    return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr);
  };
  const auto py = [&](double y) {
    return h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb);
  };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
      << "\">\n"
      << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n"
      << "<line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(h - mb)
      << "\" x2=\"" << svg_num(w - mr) << "\" y2=\"" << svg_num(h - mb)
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(mt)
      << "\" x2=\"" << svg_num(ml) << "\" y2=\"" << svg_num(h - mb)
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
    char lbl[32];
    out << "<line x1=\"" << svg_num(px(fx)) << "\" y1=\"" << svg_num(h - mb)
        << "\" x2=\"" << svg_num(px(fx)) << "\" y2=\"" << svg_num(h - mb + 5)
        << "\" stroke=\"black\"/>\n";
    std::snprintf(lbl, sizeof(lbl), "%.4g", fx);
    out << "<text x=\"" << svg_num(px(fx)) << "\" y=\"" << svg_num(h - mb + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << lbl << "</text>\n";
    out << "<line x1=\"" << svg_num(ml - 5) << "\" y1=\"" << svg_num(py(fy))
        << "\" x2=\"" << svg_num(ml) << "\" y2=\"" << svg_num(py(fy))
        << "\" stroke=\"black\"/>\n";
    std::snprintf(lbl, sizeof(lbl), "%.4g", fy);
    out << "<text x=\"" << svg_num(ml - 8) << "\" y=\"" << svg_num(py(fy) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << lbl << "</text>\n";
  }
  out << "<text x=\"" << svg_num((ml + w - mr) / 2) << "\" y=\""
      << svg_num(h - 10) << "\" font-size=\"12\" text-anchor=\"middle\">"
      << table.columns[0] << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kColors[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[si].pts.size(); ++i) {
      if (i) out << ' ';
      out << svg_num(px(series[si].pts[i].first)) << ','
          << svg_num(py(series[si].pts[i].second));
    }
    out << "\"/>\n";
    const double ly = mt + 16 * static_cast<double>(si);
    out << "<line x1=\"" << svg_num(w - mr - 120) << "\" y1=\""
        << svg_num(ly + 6) << "\" x2=\"" << svg_num(w - mr - 100) << "\" y2=\""
        << svg_num(ly + 6) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n"
        << "<text x=\"" << svg_num(w - mr - 94) << "\" y=\"" << svg_num(ly + 10)
        << "\" font-size=\"11\">" << series[si].name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_report(const Table& table, ReportFormat format,
                 const std::string& path) {
  const std::string body =
      format == ReportFormat::Csv ? table_to_csv(table) : table_to_svg(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("emit_report: cannot write " + path);
  out << body;
  if (!out) throw config_error("emit_report: write failed for " + path);
}

}  // namespace xaudit
