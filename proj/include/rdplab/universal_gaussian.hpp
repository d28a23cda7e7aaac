// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Gaussian representations shared by a family of decoders: the canonical
// additive-noise representation, the affine decoders that trace the whole
// distortion-perception boundary from it, and the rate penalty of a
// constraint set.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rdplab/numeric.hpp"
#include "rdplab/rdp_core.hpp"
#include "rdplab/types.hpp"

namespace rdplab {

/// A scalar Z jointly Gaussian with the source.
class GaussianRepresentation {
 public:
  /// Builds Z from its moments and cov(X, Z).
  GaussianRepresentation(GaussianSource source, double rep_mean,
                         double rep_variance, double covariance)
      : source_(source), rep_mean_(rep_mean), rep_variance_(rep_variance) {
    if (rep_variance < 0.0)
      throw std::domain_error("GaussianRepresentation: negative variance");
    rate_ = gaussian_mutual_information(source.variance(), rep_variance,
                                        covariance);
    correlation_ =
        rep_variance > 0.0
            ? std::clamp(covariance / std::sqrt(source.variance() *
                                                rep_variance),
                         -1.0, 1.0)
            : 0.0;
  }

  const GaussianSource& source() const noexcept { return source_; }
  double rep_mean() const noexcept { return rep_mean_; }
  double rep_variance() const noexcept { return rep_variance_; }
  double rep_stddev() const noexcept { return std::sqrt(rep_variance_); }
  double correlation() const noexcept { return correlation_; }
  double covariance() const noexcept {
    return correlation_ * source_.stddev() * rep_stddev();
  }
  Rate rate() const noexcept { return rate_; }
  bool is_degenerate() const noexcept { return rep_variance_ == 0.0; }

 private:
  GaussianSource source_;
  double rep_mean_;
  double rep_variance_;
  double correlation_ = 0.0;
  Rate rate_;
};

/// Z ~ N(mu, var (1 - 2^(-2R))) with X = Z + N, N ~ N(0, var 2^(-2R)).
inline GaussianRepresentation canonical_representation(
    const GaussianSource& src, Rate rate) {
  const double rep_var =
      src.variance() * numeric::one_minus_exp2_neg2(rate.bits());
  // cov(X, Z) = var(Z) for the additive-noise form.
  GaussianRepresentation rep(src, src.mean(), rep_var, rep_var);
  return rep;
}

/// Variance of the additive noise X - Z for the canonical form.
inline double canonical_noise_variance(const GaussianSource& src, Rate rate) {
  if (!rate.is_finite()) return 0.0;
  return src.variance() * std::exp2(-2.0 * rate.bits());
}

/// Xhat = scale * Z + offset.
struct AffineDecoder {
  double scale = 0.0;
  double offset = 0.0;
};

/// Decoder hitting perception exactly p from representation rep.
inline AffineDecoder universal_decoder_coefficients(
    const GaussianRepresentation& rep, double p) {
  const GaussianSource& src = rep.source();
  if (p < 0.0 || p > src.variance())
    throw std::domain_error(
        "universal_decoder_coefficients: perception outside [0, var]");
  if (rep.is_degenerate())
    throw std::domain_error(
        "universal_decoder_coefficients: degenerate representation");
  const double sign = rep.correlation() >= 0.0 ? 1.0 : -1.0;
  const double scale = sign * (src.stddev() - std::sqrt(p)) / rep.rep_stddev();
  return {scale, src.mean() - scale * rep.rep_mean()};
}

/// First two moments of a decoder output and its distortion and
/// perception against the source.
struct DecodedMoments {
  double mean;
  double variance;
  double mse;
  double w2_squared;
};

inline DecodedMoments decoder_moments(const GaussianRepresentation& rep,
                                      const AffineDecoder& dec) {
  const GaussianSource& src = rep.source();
  const double mean = dec.scale * rep.rep_mean() + dec.offset;
  const double var = dec.scale * dec.scale * rep.rep_variance();
  const double cov = dec.scale * rep.covariance();
  const double dm = src.mean() - mean;
  const double mse = dm * dm + src.variance() + var - 2.0 * cov;
  return {mean, var, mse, w2_squared_gaussian(src.moments(), {mean, var})};
}

/// Lower boundary of Omega(R), sampled uniformly in sqrt(P) from 0 up to the
/// perception-inactive threshold.
inline RegionBoundary omega_boundary(const GaussianSource& src, Rate rate,
                                     int n_knots) {
  if (n_knots < 2) throw std::domain_error("omega_boundary: n_knots < 2");
  if (!rate.is_finite())
    throw std::domain_error("omega_boundary: rate must be finite");
  const double root_max = std::sqrt(perception_threshold(src, rate));
  if (!(root_max > 0.0))
    throw std::domain_error("omega_boundary: boundary collapsed to a point");
  RegionBoundary b;
  b.rate = rate;
  b.knots.reserve(n_knots);
  for (int i = 0; i < n_knots; ++i) {
    const double root =
        i + 1 == n_knots ? root_max : root_max * i / (n_knots - 1);
    const double p = root * root;
    b.knots.push_back({p, distortion_rate_perception(src, rate, p)});
  }
  return b;
}

/// True iff c lies in Omega(I(X;Z)). A relative slack absorbs round-off when
/// the rate was recomputed from covariances.
inline bool covers(const GaussianRepresentation& rep, const ConstraintPair& c,
                   double rel_tol = 1e-12) {
  if (c.distortion.is_unconstrained()) return true;
  const double need =
      distortion_rate_perception(rep.source(), rep.rate(), c.perception);
  const double d = c.distortion.value();
  return d >= need - rel_tol * std::max(1.0, std::abs(need));
}

/// A non-empty finite set of constraint pairs.
class ConstraintSet {
 public:
  ConstraintSet(std::vector<ConstraintPair> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw std::domain_error("ConstraintSet: empty");
  }
  static ConstraintSet from_boundary(const RegionBoundary& b) {
    std::vector<ConstraintPair> pairs;
    pairs.reserve(b.knots.size());
    for (const auto& k : b.knots) pairs.push_back({k.distortion, k.perception});
    return ConstraintSet(std::move(pairs));
  }
  const std::vector<ConstraintPair>& pairs() const noexcept { return pairs_; }

 private:
  std::vector<ConstraintPair> pairs_;
};

struct RatePenalty {
  Rate r_theta;       ///< sup over the set of single-point rates
  Rate universal;     ///< smallest canonical rate covering every pair
  double penalty;     ///< universal - r_theta
};

/// Rate penalty of meeting every pair of theta with one representation.
inline RatePenalty rate_penalty(const GaussianSource& src,
                                const ConstraintSet& theta) {
  Rate sup(0.0);
  for (const auto& c : theta.pairs())
    sup = std::max(sup, rate_distortion_perception(src, c));
  if (!sup.is_finite()) return {sup, sup, 0.0};

  auto covers_all = [&](double bits) {
    const auto rep = canonical_representation(src, Rate(bits));
    for (const auto& c : theta.pairs())
      if (!covers(rep, c, 1e-12)) return false;
    return true;
  };
  double universal = sup.bits();
  if (!covers_all(universal)) {
    double hi = universal + 1.0;
    while (!covers_all(hi)) {
      hi = 2.0 * hi + 1.0;
      if (hi > 1e6) return {sup, Rate::infinite(), 0.0};
    }
    double lo = universal;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (covers_all(mid) ? hi : lo) = mid;
    }
    universal = hi;
  }
  return {sup, Rate(universal), universal - sup.bits()};
}

}  // namespace rdplab
