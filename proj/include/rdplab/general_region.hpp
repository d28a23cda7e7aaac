// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Achievable distortion-perception region of a fixed representation Z under
// MSE: D >= E|X - Xt|^2 + inf_{d(pX, pXhat) <= P} W2^2(pXt, pXhat), where
// Xt = E[X | Z]. Two evaluation paths are provided: an analytic one that
// summarizes Xt by its first two moments, and an empirical one built from
// samples and cell labels.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rdplab/rdp_core.hpp"
#include "rdplab/types.hpp"
#include "rdplab/universal_gaussian.hpp"
#include "rdplab/wasserstein.hpp"

namespace rdplab {

struct RepresentationSummary {
  double mmse_distortion = 0.0;  // E|X - Xt|^2
  double mmse_std = 0.0;         // std of Xt
  bool mean_matched = true;
};

/// Summary of the conditional-mean decoder for a Gaussian representation.
inline RepresentationSummary summarize(const GaussianRepresentation& rep) {
  const double rho2 = rep.correlation() * rep.correlation();
  const double var = rep.source().variance();
  return {var * (1.0 - rho2), std::sqrt(var * rho2), true};
}

namespace detail {

inline void check_summary(const GaussianSource& src,
                          const RepresentationSummary& rep) {
  if (!rep.mean_matched)
    throw std::domain_error(
        "general_region: mean-mismatched representations are unsupported");
  if (rep.mmse_distortion < 0.0 || rep.mmse_std < 0.0)
    throw std::domain_error("general_region: negative summary field");
  const double total = rep.mmse_distortion + rep.mmse_std * rep.mmse_std;
  if (total > src.variance() * (1.0 + 1e-9) + 1e-12)
    throw std::domain_error(
        "general_region: summary violates the law of total variance");
}

/// D(P) = m0 + max(0, gap - sqrt(P))^2 with gap = W2(pXt, pX).
inline RegionBoundary boundary_from_gap(double m0, double gap, Rate rate,
                                        int n_knots) {
  if (n_knots < 2) throw std::domain_error("achievable_boundary: n_knots < 2");
  RegionBoundary b;
  b.rate = rate;
  if (gap == 0.0) {
    b.knots.push_back({0.0, m0});
    return b;
  }
  for (int i = 0; i < n_knots; ++i) {
    const double root = i + 1 == n_knots ? gap : gap * i / (n_knots - 1);
    const double slack = std::max(0.0, gap - root);
    b.knots.push_back({root * root, m0 + slack * slack});
  }
  return b;
}

}  // namespace detail

/// Boundary distortion at perception p for the Gaussian-summary path.
inline double achievable_distortion(const GaussianSource& src,
                                    const RepresentationSummary& rep,
                                    Bound perception) {
  detail::check_summary(src, rep);
  const double gap = std::abs(rep.mmse_std - src.stddev());
  const double root = perception.is_unconstrained()
                          ? gap
                          : std::sqrt(perception.value());
  const double slack = std::max(0.0, gap - root);
  return rep.mmse_distortion + slack * slack;
}

/// Lower boundary of the achievable region, treating Xt through its first two
/// moments (exact in the Gaussian case).
inline RegionBoundary achievable_boundary(const GaussianSource& src,
                                          const RepresentationSummary& rep,
                                          int n_knots, Rate rate = Rate()) {
  detail::check_summary(src, rep);
  const double gap = std::abs(rep.mmse_std - src.stddev());
  return detail::boundary_from_gap(rep.mmse_distortion, gap, rate, n_knots);
}

struct ExtremePoints {
  struct Point {
    double distortion;
    double perception;
  };
  Point upper_left;   // (D^(a), P^(a)): the MMSE decoder itself
  Point lower_right;  // (D^(b), 0): perfect perception
};

/// Extreme points of the region. When the summary is a conditional mean
/// (m0 + var(Xt) = var(X)) with var(Xt) <= var(X), D^(b) <= 2 m0.
inline ExtremePoints extreme_points(const GaussianSource& src,
                                    const RepresentationSummary& rep) {
  detail::check_summary(src, rep);
  const double gap = rep.mmse_std - src.stddev();
  const double m0 = rep.mmse_distortion;
  ExtremePoints e{{m0, gap * gap}, {m0 + gap * gap, 0.0}};
  const double total = m0 + rep.mmse_std * rep.mmse_std;
  const bool conditional_mean =
      std::abs(total - src.variance()) <= 1e-9 * src.variance();
  if (conditional_mean && rep.mmse_std <= src.stddev() &&
      e.lower_right.distortion > 2.0 * m0 * (1.0 + 1e-12) + 1e-15)
    throw std::logic_error("extreme_points: two-fold bound violated");
  return e;
}

/// Closed-form gaps between the lower-right extreme point of the MMSE
/// representation at distortion d1 and that of Omega(R(d1, inf)).
struct GapBounds {
  double d3_lower;              // lower bound on D3 with R(D3, 0) = R(d1, inf)
  double additive_bound;        // D^(b) - D3
  double multiplicative_bound;  // D^(b) / D3
  double tilde_additive;        // Dt^(a) - D1
  double tilde_multiplicative;  // Dt^(a) / D1
};

inline GapBounds gap_bounds(const GaussianSource& src, double d1) {
  const double var = src.variance();
  if (!(d1 > 0.0) || d1 > var)
    throw std::domain_error("gap_bounds: d1 must lie in (0, var]");
  const double sigma = src.stddev();
  const double root = std::sqrt(var - d1);
  // var - sigma * root, written without cancellation.
  const double half_d3 = sigma * d1 / (sigma + root);
  const double d3 = 2.0 * half_d3;
  GapBounds g;
  g.d3_lower = d3;
  g.additive_bound = 2.0 * d1 - d3;
  g.multiplicative_bound = (sigma + root) / sigma;
  g.tilde_additive = 0.5 * d3 - d3 * d3 / (4.0 * var);
  g.tilde_multiplicative = 2.0 - d3 / (2.0 * var);
  return g;
}

struct EmpiricalRegion {
  RepresentationSummary summary;
  double w2_to_source = 0.0;  // empirical W2^2(pXt, pX)
  RegionBoundary boundary;
  std::size_t cells = 0;
};

/// Plug-in region for a concrete quantizer: Xt is the per-cell sample mean and
/// the infimum term is computed exactly in one dimension from the empirical
/// quantile coupling, where the optimal Xhat lies on the W2 geodesic between
/// pXt and pX.
inline EmpiricalRegion empirical_region(std::span<const double> x,
                                        std::span<const std::int64_t> cell_ids,
                                        int n_knots,
                                        std::size_t min_occupancy = 1) {
  if (x.empty()) throw std::domain_error("empirical_region: empty input");
  if (x.size() != cell_ids.size())
    throw std::domain_error("empirical_region: length mismatch");
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::unordered_map<std::int64_t, Acc> cells;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto& a = cells[cell_ids[i]];
    a.sum += x[i];
    ++a.n;
  }
  for (const auto& [id, a] : cells)
    if (a.n < min_occupancy)
      throw std::domain_error("empirical_region: under-occupied cell " +
                              std::to_string(id));

  const double n = static_cast<double>(x.size());
  std::vector<double> xt(x.size());
  double mean_xt = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& a = cells.at(cell_ids[i]);
    xt[i] = a.sum / static_cast<double>(a.n);
    mean_xt += xt[i];
  }
  mean_xt /= n;
  double m0 = 0.0, var_xt = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i] - xt[i];
    m0 += r * r;
    const double c = xt[i] - mean_xt;
    var_xt += c * c;
  }
  m0 /= n;
  var_xt /= n;

  EmpiricalRegion out;
  out.summary = {m0, std::sqrt(var_xt), true};
  out.cells = cells.size();
  out.w2_to_source = empirical_w2(xt, x);
  out.boundary = detail::boundary_from_gap(m0, std::sqrt(out.w2_to_source),
                                           Rate(), n_knots);
  return out;
}

}  // namespace rdplab
