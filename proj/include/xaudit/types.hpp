// Copyright 2026 The xaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace xaudit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Malformed configuration or CLI input.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Protocol violation: budget exceeded, response malformed, dimensions off.
class protocol_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The data-subject oracle returned an answer no hypothesis in the class can
// produce (e.g. a version-space cut that excludes the whole ellipsoid).
class untruthful_ds_error : public protocol_error {
 public:
  using protocol_error::protocol_error;
};

// Labels are +1/-1 throughout; sign(0) = +1 everywhere.
inline int sign(double x) { return x >= 0.0 ? +1 : -1; }

// Shortest decimal rendering that round-trips a double (17 significant
// digits). Used for transcripts and for hashing queries, so it must be
// byte-stable.
inline std::string format_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// 64-bit FNV-1a. Stable across platforms; used to derive per-query RNG
// streams so oracle responses do not depend on query order.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic RNG with hand-rolled transforms. The standard distributions
// are implementation-defined, which would break byte-for-byte replay across
// toolchains; these transforms are pinned by tests instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via the polar method (pair-cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
  }

  Vec normal_vector(int d) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = normal();
    return x;
  }

  // Uniform on the unit sphere S^{d-1}.
  Vec unit_vector(int d) {
    Vec x = normal_vector(d);
    double n = x.norm();
    while (n < 1e-300) {
      x = normal_vector(d);
      n = x.norm();
    }
    return x / n;
  }

  // Uniform in the closed unit ball of R^d.
  Vec ball_point(int d) {
    return unit_vector(d) *
           std::pow(uniform01(), 1.0 / static_cast<double>(d));
  }

  // Uniform in an axis-aligned box.
  Vec box_point(const Vec& lo, const Vec& hi) {
    Vec x(lo.size());
    for (int i = 0; i < lo.size(); ++i) x[i] = uniform(lo[i], hi[i]);
    return x;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Seed for the RNG stream that answers one specific query: hash of the
// session seed and the query's canonical text rendering.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= static_cast<unsigned char>(seed >> (8 * i));
    h *= 0x100000001b3ULL;
  }
  return fnv1a(bytes, h);
}

}  // namespace xaudit
