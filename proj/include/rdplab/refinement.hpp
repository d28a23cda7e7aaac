// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Two-stage (successive refinement) constructions for a Gaussian source, the
// one-shot inner and outer rate-region corners, and the approximate
// refinability penalty delta_R.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "rdplab/numeric.hpp"
#include "rdplab/one_shot.hpp"
#include "rdplab/rdp_core.hpp"
#include "rdplab/types.hpp"
#include "rdplab/universal_gaussian.hpp"

namespace rdplab {

/// Z1 ~ N(mu, z1_variance), Z2 = Z1 + N1, X = Z2 + N2 with independent
/// Gaussian noises.
struct TwoStagePlan {
  double z1_variance = 0.0;
  double n1_variance = 0.0;
  double n2_variance = 0.0;
  Rate r1;
  Rate r2;  // total rate after the second stage
};

inline TwoStagePlan gaussian_two_stage(const GaussianSource& src, Rate r1,
                                       Rate r2_total) {
  if (r1 > r2_total)
    throw std::domain_error("gaussian_two_stage: r1 exceeds r2_total");
  const double var = src.variance();
  const double e2 =
      r2_total.is_finite() ? std::exp2(-2.0 * r2_total.bits()) : 0.0;
  TwoStagePlan plan;
  plan.z1_variance = var * numeric::one_minus_exp2_neg2(r1.bits());
  plan.n2_variance = var * e2;
  // Close the variance budget exactly.
  plan.n1_variance = std::max(0.0, var - plan.z1_variance - plan.n2_variance);
  if (r1 == r2_total) plan.n1_variance = 0.0;
  plan.r1 = r1;
  plan.r2 = r2_total;
  return plan;
}

/// Stage-1 representation Z1 of a plan.
inline GaussianRepresentation stage_one(const GaussianSource& src,
                                        const TwoStagePlan& plan) {
  return GaussianRepresentation(src, src.mean(), plan.z1_variance,
                                plan.z1_variance);
}

/// Stage-2 representation Z2 = Z1 + N1 of a plan.
inline GaussianRepresentation stage_two(const GaussianSource& src,
                                        const TwoStagePlan& plan) {
  const double v = plan.z1_variance + plan.n1_variance;
  return GaussianRepresentation(src, src.mean(), v, v);
}

/// Information quantities of a plan computed by sequential Gaussian
/// conditioning on the joint covariance of (X, Z1, Z2).
struct StageInformation {
  double i_x_z1;       // I(X; Z1)
  double i_x_z2;       // I(X; Z2)
  double i_x_z1z2;     // I(X; Z1, Z2)
  double i_x_z2_g_z1;  // I(X; Z2 | Z1)
};

namespace detail {

/// Residual variance of component 0 after conditioning on components
/// 1..n-1 in order (Gram-Schmidt on a covariance matrix). Components whose
/// innovation variance vanishes carry no new information and are skipped.
template <std::size_t N>
double residual_variance(std::array<std::array<double, N>, N> cov,
                         std::size_t upto) {
  const double scale = cov[0][0];
  for (std::size_t k = 1; k < upto; ++k) {
    const double pivot = cov[k][k];
    if (pivot <= 1e-15 * scale) continue;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        if (i != k && j != k) cov[i][j] -= cov[i][k] * cov[k][j] / pivot;
    for (std::size_t i = 0; i < N; ++i) cov[i][k] = cov[k][i] = 0.0;
  }
  return cov[0][0];
}

inline double info_bits(double prior, double posterior) {
  if (posterior <= 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * std::log2(prior / posterior);
}

}  // namespace detail

inline StageInformation stage_information(const GaussianSource& src,
                                          const TwoStagePlan& plan) {
  const double var = src.variance();
  const double v1 = plan.z1_variance;
  const double v2 = plan.z1_variance + plan.n1_variance;
  using M = std::array<std::array<double, 3>, 3>;
  // Order (X, Z1, Z2): cov(X,Z1)=v1, cov(X,Z2)=v2, cov(Z1,Z2)=v1.
  const M joint{{{var, v1, v2}, {v1, v1, v1}, {v2, v1, v2}}};
  const M swapped{{{var, v2, v1}, {v2, v2, v1}, {v1, v1, v1}}};
  const double post1 = detail::residual_variance(joint, 2);
  const double post12 = detail::residual_variance(joint, 3);
  const double post2 = detail::residual_variance(swapped, 2);
  StageInformation s;
  s.i_x_z1 = detail::info_bits(var, post1);
  s.i_x_z2 = detail::info_bits(var, post2);
  s.i_x_z1z2 = detail::info_bits(var, post12);
  s.i_x_z2_g_z1 = detail::info_bits(post1, post12);
  return s;
}

enum class CornerKind { Outer, InnerWithOverhead };

struct RateRegionCorner {
  Rate r1;
  Rate r2;
  CornerKind kind;
};

struct RegionCorners {
  RateRegionCorner outer;
  RateRegionCorner inner;
};

/// Corners of the outer region {R1 >= I1, R1 + R2 >= I12} and of the inner
/// region with one-shot overheads, for I1 = r_theta1 and I12 = r_theta2.
inline RegionCorners region_corners(Rate r_theta1, Rate r_theta2) {
  if (r_theta1 > r_theta2)
    throw std::domain_error("region_corners: r_theta1 exceeds r_theta2");
  const double i1 = r_theta1.bits();
  const double i2_given_1 = r_theta2.bits() - i1;
  RegionCorners c;
  c.outer = {r_theta1, Rate::from_bits_clamped(i2_given_1), CornerKind::Outer};
  c.inner = {Rate(functional_representation_overhead(i1)),
             Rate(functional_representation_overhead(
                 std::max(0.0, i2_given_1))),
             CornerKind::InnerWithOverhead};
  return c;
}

/// delta_R(sigma_N^2) =
///   r_theta1 - R(var sN / (var + sN), inf)
///   + m/2 log2((d1 + sN)(d2 + sN) / sN^2).
inline double delta_r(double var_x, int m, Rate r_theta1, double d1_star,
                      double d2_star, double noise_var) {
  if (!(var_x > 0.0) || !(noise_var > 0.0) || m < 1)
    throw std::domain_error("delta_r: variances and dimension must be positive");
  if (!(d1_star > 0.0) || d1_star > var_x || !(d2_star > 0.0))
    throw std::domain_error("delta_r: distortion targets out of range");
  if (!r_theta1.is_finite()) throw std::domain_error("delta_r: infinite rate");
  const GaussianSource src(0.0, var_x);
  const double mmse = var_x * noise_var / (var_x + noise_var);
  const double log_term =
      std::log2(d1_star / noise_var + 1.0) + std::log2(d2_star / noise_var + 1.0);
  return r_theta1.bits() - rate_distortion(src, mmse).bits() +
         0.5 * m * log_term;
}

/// delta_R at sigma_N^2 = var d1 / (var - d1). At d1 = var that point is at
/// infinity and the limit r_theta1 is returned.
inline double delta_r_canonical(double var_x, int m, Rate r_theta1,
                                double d1_star, double d2_star) {
  if (d1_star == var_x) return r_theta1.bits();
  return delta_r(var_x, m, r_theta1, d1_star, d2_star,
                 var_x * d1_star / (var_x - d1_star));
}

struct DeltaMinimum {
  double noise_var;
  double delta;
  double log2_lo = -20.0;  // search bracket on log2 sigma_N^2
  double log2_hi = 20.0;
};

/// inf over sigma_N^2 of delta_R by a coarse scan plus golden section on
/// log2 sigma_N^2 in [-20, 20].
inline DeltaMinimum delta_r_infimum(double var_x, int m, Rate r_theta1,
                                    double d1_star, double d2_star) {
  auto f = [&](double lg) {
    return delta_r(var_x, m, r_theta1, d1_star, d2_star, std::exp2(lg));
  };
  DeltaMinimum out;
  const auto best = numeric::scan_then_golden(f, out.log2_lo, out.log2_hi, 800,
                                              1e-10);
  out.noise_var = std::exp2(best.x);
  out.delta = best.value;
  if (d1_star < var_x) {
    const double canon = var_x * d1_star / (var_x - d1_star);
    const double lg = std::log2(canon);
    if (lg >= out.log2_lo && lg <= out.log2_hi) {
      const double v = f(lg);
      if (v < out.delta) {
        out.delta = v;
        out.noise_var = canon;
      }
    }
  }
  return out;
}

}  // namespace rdplab
