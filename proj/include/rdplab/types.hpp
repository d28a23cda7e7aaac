// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdplab {

/// Tag for a constraint that is switched off.
struct Unconstrained {};
inline constexpr Unconstrained unconstrained{};

/// An extended non-negative real: either a finite value or Unconstrained.
/// Unconstrained compares greater than every finite value.
class Bound {
 public:
  constexpr Bound(Unconstrained) noexcept : value_(0.0), finite_(false) {}
  Bound(double value) : value_(value), finite_(true) {  // NOLINT(implicit)
    if (std::isnan(value)) throw std::domain_error("Bound: NaN value");
    if (std::isinf(value)) {
      if (value < 0) throw std::domain_error("Bound: -inf value");
      finite_ = false;
      value_ = 0.0;
    }
  }

  bool is_unconstrained() const noexcept { return !finite_; }
  bool is_finite() const noexcept { return finite_; }

  double value() const {
    if (!finite_) throw std::logic_error("Bound: value() on Unconstrained");
    return value_;
  }
  double value_or(double fallback) const noexcept {
    return finite_ ? value_ : fallback;
  }

  friend bool operator==(const Bound& a, const Bound& b) noexcept {
    return a.finite_ == b.finite_ && (!a.finite_ || a.value_ == b.value_);
  }
  friend std::partial_ordering operator<=>(const Bound& a,
                                           const Bound& b) noexcept {
    if (!a.finite_ && !b.finite_) return std::partial_ordering::equivalent;
    if (!a.finite_) return std::partial_ordering::greater;
    if (!b.finite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

 private:
  double value_;
  bool finite_;
};

inline std::string to_string(const Bound& b) {
  return b.is_unconstrained() ? std::string("unconstrained")
                              : std::to_string(b.value());
}

/// A (distortion, perception) target.
struct ConstraintPair {
  Bound distortion = unconstrained;
  Bound perception = unconstrained;

  friend bool operator==(const ConstraintPair&,
                         const ConstraintPair&) = default;
};

/// A rate in bits. Rates are never negative; +inf is a legal value used for
/// zero distortion on a continuous source.
class Rate {
 public:
  constexpr Rate() noexcept = default;
  explicit Rate(double bits) : bits_(bits) {
    if (std::isnan(bits) || bits < 0.0)
      throw std::domain_error("Rate: must be non-negative");
  }
  static Rate infinite() noexcept {
    Rate r;
    r.bits_ = std::numeric_limits<double>::infinity();
    return r;
  }
  /// Clamps tiny negative round-off to zero.
  static Rate from_bits_clamped(double bits) {
    return Rate(bits < 0.0 && bits > -1e-12 ? 0.0 : bits);
  }

  double bits() const noexcept { return bits_; }
  bool is_finite() const noexcept { return std::isfinite(bits_); }

  friend auto operator<=>(const Rate&, const Rate&) = default;

 private:
  double bits_ = 0.0;
};

/// Mean and variance of a scalar law.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Scalar Gaussian source N(mean, variance).
class GaussianSource {
 public:
  GaussianSource(double mean, double variance)
      : mean_(mean), variance_(variance) {
    if (!std::isfinite(mean) || !std::isfinite(variance) || variance <= 0.0)
      throw std::domain_error("GaussianSource: variance must be positive");
  }
  /// A point-mass source. Only the Monte Carlo layer accepts it.
  static GaussianSource degenerate(double mean) {
    GaussianSource s(mean, 1.0);
    s.variance_ = 0.0;
    return s;
  }

  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  double stddev() const noexcept { return std::sqrt(variance_); }
  bool is_degenerate() const noexcept { return variance_ == 0.0; }
  Moments moments() const noexcept { return {mean_, variance_}; }

 private:
  double mean_;
  double variance_;
};

/// Knot list describing the lower boundary of a distortion-perception region.
struct RegionBoundary {
  struct Knot {
    double perception;
    double distortion;
  };
  std::vector<Knot> knots;
  Rate rate;
};

/// Thrown when a constraint set admits no channel.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an iterative method fails to meet its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rdplab
