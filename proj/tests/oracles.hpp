// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Reference computations used by the tests. Nothing here calls into the
// library; each routine recomputes its quantity from first principles.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Minimizes f over [lo, hi]: dense scan, then golden section on the best
/// bracket. Endpoints are included in the scan.
inline double minimize(const std::function<double(double)>& f, double lo,
                       double hi, int grid = 4000) {
  if (hi <= lo) return f(lo);
  const double h = (hi - lo) / grid;
  int best = 0;
  double fb = kInf;
  for (int i = 0; i <= grid; ++i) {
    const double v = f(i == grid ? hi : lo + i * h);
    if (v < fb) {
      fb = v;
      best = i;
    }
  }
  double a = lo + h * std::max(0, best - 1);
  double b = std::min(hi, lo + h * (best + 1));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (fc < fd) {
      b = d, d = c, fd = fc, c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd, d = a + g * (b - a), fd = f(d);
    }
  }
  return std::min({fb, fc, fd});
}

/// Min over jointly Gaussian (X, Xhat) with equal means of I(X; Xhat) in bits
/// subject to E(X - Xhat)^2 <= d and (sigma - sigma_hat)^2 <= p. For each
/// sigma_hat the information grows with |theta|, so the smallest feasible
/// covariance theta = max(0, (var + sigma_hat^2 - d) / 2) is used.
inline double gaussian_rdp_bits(double var, double d, double p) {
  const double s = std::sqrt(var);
  const double lo = std::max(0.0, s - std::sqrt(p));
  const double hi = s + std::sqrt(p);
  auto info = [&](double sh) {
    const double theta = std::max(0.0, 0.5 * (var + sh * sh - d));
    const double prod = var * sh * sh;
    if (theta == 0.0) return 0.0;
    if (theta * theta >= prod) return kInf;
    return -0.5 * std::log2(1.0 - theta * theta / prod);
  };
  return minimize(info, lo, hi);
}

/// Smallest d with gaussian_rdp_bits(var, d, p) <= r, by bisection.
inline double gaussian_drp(double var, double r, double p) {
  double lo = 0.0, hi = 4.0 * var;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gaussian_rdp_bits(var, mid, p) <= r ? hi : lo) = mid;
  }
  return hi;
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_pdf(double x, double var) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * M_PI * var);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// KL(N(0, a) || N(0, b)) in nats by quadrature.
inline double kl_normal_nats(double a, double b) {
  const double w = 14.0 * std::sqrt(std::max(a, b));
  return simpson(
      [&](double x) {
        const double p = normal_pdf(x, a);
        if (p == 0.0) return 0.0;
        return p * (std::log(p) - std::log(normal_pdf(x, b)));
      },
      -w, w);
}

/// h(X + V) - log2(step) in bits for X ~ N(0, var), V ~ U[-step/2, step/2].
inline double dithered_entropy_bits(double var, double step) {
  const double s = std::sqrt(var);
  auto f = [&](double y) {
    return (normal_cdf((y + 0.5 * step) / s) - normal_cdf((y - 0.5 * step) / s)) / step;
  };
  const double w = 14.0 * s + step;
  const double h = simpson(
      [&](double y) {
        const double v = f(y);
        return v > 0.0 ? -v * std::log2(v) : 0.0;
      },
      -w, w, 200000);
  return h - std::log2(step);
}

/// I(X; Y) in bits from a joint pmf as H(X) + H(Y) - H(X, Y).
inline double mutual_information_joint(const std::vector<std::vector<double>>& joint) {
  auto h = [](double v) { return v > 0.0 ? -v * std::log2(v) : 0.0; };
  std::vector<double> px(joint.size(), 0.0), py(joint.at(0).size(), 0.0);
  double hxy = 0.0;
  for (std::size_t i = 0; i < joint.size(); ++i)
    for (std::size_t j = 0; j < joint[i].size(); ++j) {
      px[i] += joint[i][j];
      py[j] += joint[i][j];
      hxy += h(joint[i][j]);
    }
  double hx = 0.0, hy = 0.0;
  for (double v : px) hx += h(v);
  for (double v : py) hy += h(v);
  return hx + hy - hxy;
}

inline double binary_entropy(double e) {
  if (e <= 0.0 || e >= 1.0) return 0.0;
  return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

/// E(X - E[X | cell])^2 for standard normal X quantized by the given
/// interior thresholds (sorted). Cells are intervals, so E[X | cell] is a
/// monotone function of X and W2^2 between its law and that of X is the
/// same quantity.
inline double cell_mean_residual(const std::vector<double>& thresholds) {
  std::vector<double> edges{-kInf};
  edges.insert(edges.end(), thresholds.begin(), thresholds.end());
  edges.push_back(kInf);
  auto phi = [](double x) {
    return std::isinf(x) ? 0.0 : std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  };
  auto cdf = [](double x) { return std::isinf(x) ? (x > 0 ? 1.0 : 0.0) : normal_cdf(x); };
  double explained = 0.0;
  for (std::size_t c = 0; c + 1 < edges.size(); ++c) {
    const double mass = cdf(edges[c + 1]) - cdf(edges[c]);
    const double mu = (phi(edges[c]) - phi(edges[c + 1])) / mass;
    explained += mass * mu * mu;
  }
  return 1.0 - explained;
}

/// Determinant of a small symmetric matrix by Gaussian elimination.
inline double determinant(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    if (a[piv][k] == 0.0) return 0.0;
    if (piv != k) {
      std::swap(a[piv], a[k]);
      det = -det;
    }
    det *= a[k][k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  return det;
}

/// Plain 2-D grid scan over binary channels [[1-a, a], [b, 1-b]]. Returns
/// the smallest information among grid channels meeting the constraints,
/// which upper-bounds the true minimum. perception(q0) maps the output mass
/// on symbol 0 to the divergence from the source.
inline double binary_grid_min(double p0, double d01, double d10,
                              double dmax, double pmax,
                              const std::function<double(double)>& perception,
                              int steps = 1000) {
  double best = kInf;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j) {
      const double a = double(i) / steps, b = double(j) / steps;
      const double p1 = 1.0 - p0;
      if (p0 * a * d01 + p1 * b * d10 > dmax) continue;
      const double q0 = p0 * (1 - a) + p1 * b;
      if (perception(q0) > pmax + 1e-12) continue;
      best = std::min(best, mutual_information_joint(
                                {{p0 * (1 - a), p0 * a}, {p1 * b, p1 * (1 - b)}}));
    }
  return best;
}

}  // namespace oracle
