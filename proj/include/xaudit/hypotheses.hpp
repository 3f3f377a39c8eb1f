// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xaudit/types.hpp"

namespace xaudit {

// sign(<w,x> + b); sign(0) = +1.
struct LinearClassifier {
  Vec w;
  double b = 0.0;

  int dim() const { return static_cast<int>(w.size()); }
  bool homogeneous() const { return b == 0.0; }

  int predict(const Vec& x) const {
    if (x.size() != w.size())
      throw protocol_error("lc_predict: dimension mismatch");
    return sign(w.dot(x) + b);
  }
};

// Two-threshold classifier over (v, g): +1 iff v >= theta_g, g in {0,1}.
// v ranges over [lo, hi]; f maps raw non-interest features to v when the
// classifier is applied to full points.
struct ExtendedThreshold {
  double theta1 = 0.0;  // group g = 0
  double theta2 = 0.0;  // group g = 1
  double lo = -1.0;
  double hi = 1.0;
  std::function<double(const Vec&)> f;  // optional; scalar protocol uses v directly

  int predict(double v, int g) const {
    if (g != 0 && g != 1) throw protocol_error("et_predict: g must be 0 or 1");
    return sign(v - (g == 0 ? theta1 : theta2));
  }

  // Applies the classifier to a protocol point x = (v, g).
  int predict_point(const Vec& x) const {
    if (x.size() != 2) throw protocol_error("et_predict: expected (v, g) point");
    return predict(x[0], static_cast<int>(std::lround(x[1])));
  }

  // Applies f to the raw non-interest features, then thresholds.
  int predict_raw(const Vec& x_prime, int g) const {
    if (!f) throw config_error("extended threshold has no feature map f");
    return predict(f(x_prime), g);
  }

  double threshold(int g) const { return g == 0 ? theta1 : theta2; }
};

using Hypothesis = std::variant<LinearClassifier, ExtendedThreshold>;

inline int lc_predict(const LinearClassifier& h, const Vec& x) {
  return h.predict(x);
}

inline int et_predict(const ExtendedThreshold& h, double v, int g) {
  return h.predict(v, g);
}

// Predicts on a protocol point: d-vector for LC, (v, g) for ET.
int predict(const Hypothesis& h, const Vec& x);

int hypothesis_dim(const Hypothesis& h);

// Builtin f choices for ExtendedThreshold.
std::function<double(const Vec&)> affine_f(Vec coeffs, double intercept);
std::function<double(const Vec&)> random_affine_f(int d, std::uint64_t seed);
std::function<double(const Vec&)> table_f(std::vector<double> values);

// Two points identical except at coordinate s, where they take values 0 and 1.
struct Pair {
  Vec a;
  Vec b;
  int s = 0;
};

bool valid_pair(const Pair& p, double tol = 0.0);

// True iff the hypothesis labels the pair's endpoints differently.
bool responsive_pair(const Hypothesis& h, const Pair& p);

// Calibration constant c = 2^(d-2) / (pi^((d-1)/2) * Gamma((d+1)/2)) for the
// anchor-route LC auditor: its decision threshold is Delta = eps/(2c) and its
// default budget scales with log2(2c/eps). Computed in log space, relative
// error < 1e-10 for all d >= 2.
double dimension_constant(int d);

// Upper bound on the feature-sensitivity score of an LC whose last coordinate
// is the feature of interest: 2^(d-2) * Gamma((d+1)/2) / pi^((d-1)/2) times
// |w_d|, the slab-to-ball volume ratio of the responsive region. The bound
// lives in the scaling where the non-interest block w' has unit L2 norm;
// other scalings are normalized first.
double score_upper_bound_lc(const LinearClassifier& h);

// Exact score of an extended threshold: |theta2 - theta1| / (hi - lo).
double score_et(const ExtendedThreshold& h);

// Pair distribution: base point from a ball, box, or dataset rows, with
// coordinate s rewritten to 0 and 1. Ball draws the non-interest block
// uniformly from the unit ball (the geometry the score bound assumes).
struct PairSampler {
  enum class Base { Ball, Box, Dataset };
  Base base = Base::Ball;
  int dim = 2;         // full dimension, including coordinate s
  int s = -1;          // -1 means last coordinate
  Vec box_lo, box_hi;  // Base::Box
  Mat data;            // Base::Dataset rows
  std::uint64_t seed = 0;

  int feature() const { return s < 0 ? dim - 1 : s; }
  Pair sample(Rng& rng) const;
};

// Fraction of n sampled pairs that are responsive. Deterministic given the
// sampler's seed.
double score_monte_carlo(const Hypothesis& h, const PairSampler& sampler, int n);

// 2-D linear view of an extended threshold over (v, g):
// w = (1, theta1 - theta2), b = -theta1.
LinearClassifier et_to_linear(const ExtendedThreshold& h);

// Finite search space for the general auditor; scores are supplied by the
// caller and cached per member.
struct HypothesisPool {
  std::vector<Hypothesis> members;
  std::vector<double> scores;
};

// Text records: "lc,<d>,<b>,<w_1>,...,<w_d>" and "et,<t1>,<t2>,<lo>,<hi>".
// 17 significant digits; f is process-local and not serialized.
std::string to_record(const Hypothesis& h);
Hypothesis parse_record(const std::string& record);

}  // namespace xaudit
