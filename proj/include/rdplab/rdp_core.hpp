// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Closed-form rate-distortion-perception functions for a scalar Gaussian
// source under squared error and squared Wasserstein-2 perception loss.
// All rates are in bits.

#pragma once

#include <cmath>
#include <stdexcept>

#include "rdplab/numeric.hpp"
#include "rdplab/types.hpp"

namespace rdplab {

/// Classical R(D) = max(0, 1/2 log2(var / D)). D = 0 gives an infinite rate.
inline Rate rate_distortion(const GaussianSource& src, Bound distortion) {
  if (distortion.is_unconstrained()) return Rate(0.0);
  const double d = distortion.value();
  if (d < 0.0) throw std::domain_error("rate_distortion: negative distortion");
  if (d == 0.0) return Rate::infinite();
  if (d >= src.variance()) return Rate(0.0);
  return Rate(0.5 * std::log2(src.variance() / d));
}

/// True when the perception constraint binds at distortion d, i.e.
/// sqrt(P) < sigma - sqrt(|var - d|). Ties resolve to the classical branch.
inline bool perception_active(const GaussianSource& src, double d, double p) {
  return std::sqrt(p) <
         src.stddev() - std::sqrt(std::abs(src.variance() - d));
}

/// R(D, P) for a Gaussian source.
inline Rate rate_distortion_perception(const GaussianSource& src,
                                       const ConstraintPair& c) {
  if (c.distortion.is_unconstrained()) return Rate(0.0);
  const double d = c.distortion.value();
  if (d < 0.0)
    throw std::domain_error("rate_distortion_perception: negative distortion");
  if (c.perception.is_unconstrained()) return rate_distortion(src, d);
  const double p = c.perception.value();
  if (p < 0.0)
    throw std::domain_error("rate_distortion_perception: negative perception");
  if (!perception_active(src, d, p)) return rate_distortion(src, d);

  // Both constraints bind: sigma_hat = sigma - sqrt(P) and
  // theta = (var + sigma_hat^2 - D) / 2. The denominator var*sigma_hat^2 -
  // theta^2 factors as (D - P)/2 * (sigma*sigma_hat + theta), which avoids
  // cancellation at high rate.
  const double sigma = src.stddev();
  const double s = (src.variance() - p) / (sigma + std::sqrt(p));
  const double theta = 0.5 * (src.variance() + s * s - d);
  const double num = sigma * s;
  const double den = 0.5 * (d - p) * (num + theta);
  if (den <= 0.0) return Rate::infinite();
  return Rate::from_bits_clamped(0.5 * std::log2(num * num / den));
}

/// Perception level above which the constraint no longer binds at rate r:
/// (sigma - sqrt(var - var 2^(-2r)))^2.
inline double perception_threshold(const GaussianSource& src, Rate r) {
  if (!r.is_finite()) return 0.0;
  const double eps = std::exp2(-2.0 * r.bits());
  const double root = std::sqrt(numeric::one_minus_exp2_neg2(r.bits()));
  const double gap = src.stddev() * eps / (1.0 + root);
  return gap * gap;
}

/// D(P, R): minimum distortion at rate r under perception bound p.
inline double distortion_rate_perception(const GaussianSource& src, Rate r,
                                         Bound perception) {
  const double var = src.variance();
  if (!r.is_finite()) return 0.0;
  const double eps = std::exp2(-2.0 * r.bits());
  if (perception.is_unconstrained()) return var * eps;
  const double p = perception.value();
  if (p < 0.0)
    throw std::domain_error("distortion_rate_perception: negative perception");
  if (!(p < perception_threshold(src, r))) return var * eps;
  const double sigma = src.stddev();
  const double s = (var - p) / (sigma + std::sqrt(p));
  const double rho = std::sqrt(numeric::one_minus_exp2_neg2(r.bits()));
  return var + s * s - 2.0 * sigma * s * rho;
}

/// Squared W2 distance between two scalar Gaussians.
inline double w2_squared_gaussian(const Moments& a, const Moments& b) {
  if (a.variance < 0.0 || b.variance < 0.0)
    throw std::domain_error("w2_squared_gaussian: negative variance");
  const double dm = a.mean - b.mean;
  const double ds = std::sqrt(a.variance) - std::sqrt(b.variance);
  return dm * dm + ds * ds;
}

/// KL(N(mean_X, recon_variance) || p_X) in nats, as used for the KL-perception
/// variant: (s2 - var)/(2 var) + 1/2 ln(var / s2).
inline double kl_gaussian(const GaussianSource& src, double recon_variance) {
  if (!(recon_variance > 0.0))
    throw std::domain_error("kl_gaussian: reconstruction variance must be > 0");
  const double var = src.variance();
  return (recon_variance - var) / (2.0 * var) +
         0.5 * std::log(var / recon_variance);
}

/// I(X; Xhat) in bits for jointly Gaussian scalars with the given covariance.
inline Rate gaussian_mutual_information(double var_x, double var_xhat,
                                        double cov) {
  if (var_x < 0.0 || var_xhat < 0.0)
    throw std::domain_error("gaussian_mutual_information: negative variance");
  const double prod = var_x * var_xhat;
  const double c2 = cov * cov;
  if (c2 > prod * (1.0 + 1e-15))
    throw std::domain_error("gaussian_mutual_information: invalid covariance");
  if (c2 == 0.0) return Rate(0.0);
  if (c2 >= prod) return Rate::infinite();
  return Rate::from_bits_clamped(-0.5 * std::log2(1.0 - c2 / prod));
}

}  // namespace rdplab
