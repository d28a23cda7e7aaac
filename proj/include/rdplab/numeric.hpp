// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>

namespace rdplab::numeric {

inline constexpr double kLn2 = std::numbers::ln2;

/// 1 - 2^(-2r), accurate for small r.
inline double one_minus_exp2_neg2(double r) {
  if (std::isinf(r)) return 1.0;
  return -std::expm1(-2.0 * r * kLn2);
}

/// x log2 x with the 0 log 0 = 0 convention.
inline double xlog2x(double x) {
  return x > 0.0 ? x * std::log2(x) : 0.0;
}

/// Shannon entropy in bits of a pmf (not required to be normalized exactly).
inline double entropy_bits(std::span<const double> pmf) {
  double h = 0.0;
  for (double p : pmf) h -= xlog2x(p);
  return h;
}

struct Minimum {
  double x;
  double value;
};

/// Golden-section search for a unimodal f on [lo, hi].
template <class F>
Minimum golden_section(F&& f, double lo, double hi, double abs_tol = 1e-12,
                       int max_iter = 500) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > abs_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

/// Uniform scan of [lo, hi] followed by golden-section refinement around the
/// best grid cell. Endpoints are always evaluated, so minima on the boundary
/// are found exactly.
template <class F>
Minimum scan_then_golden(F&& f, double lo, double hi, int grid = 400,
                         double abs_tol = 1e-12) {
  if (!(hi >= lo)) throw std::domain_error("scan_then_golden: empty bracket");
  if (hi == lo) return {lo, f(lo)};
  const double h = (hi - lo) / grid;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double x = i == grid ? hi : lo + h * i;
    const double v = f(x);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = lo + h * std::max(best - 1, 0);
  const double b = best + 1 >= grid ? hi : lo + h * (best + 1);
  Minimum m = golden_section(f, a, b, abs_tol);
  const double x_best = best == grid ? hi : lo + h * best;
  if (best_val < m.value) return {x_best, best_val};
  return m;
}

/// Bisection for a root of f on [lo, hi] given a sign change.
template <class F>
double bisect(F&& f, double lo, double hi, double abs_tol = 1e-14,
              int max_iter = 300) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw std::domain_error("bisect: no sign change");
  for (int it = 0; it < max_iter && (hi - lo) > abs_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace rdplab::numeric
