// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rdplab/types.hpp"

using namespace rdplab;

TEST(Bound, UnconstrainedIsGreaterThanEveryFiniteValue) {
  const Bound u = unconstrained;
  EXPECT_TRUE(u.is_unconstrained());
  EXPECT_GT(u, Bound(1e300));
  EXPECT_LT(Bound(0.0), u);
  EXPECT_EQ(u, Bound(unconstrained));
  EXPECT_EQ(Bound(std::numeric_limits<double>::infinity()), u);
}

TEST(Bound, RejectsNanAndNegativeInfinity) {
  EXPECT_THROW(Bound(std::nan("")), std::domain_error);
  EXPECT_THROW(Bound(-std::numeric_limits<double>::infinity()), std::domain_error);
  EXPECT_THROW(Bound(unconstrained).value(), std::logic_error);
  EXPECT_EQ(Bound(unconstrained).value_or(3.0), 3.0);
}

TEST(Rate, NonNegativeWithInfinity) {
  EXPECT_THROW(Rate(-0.1), std::domain_error);
  EXPECT_FALSE(Rate::infinite().is_finite());
  EXPECT_GT(Rate::infinite(), Rate(1e9));
  EXPECT_EQ(Rate::from_bits_clamped(-1e-15).bits(), 0.0);
  EXPECT_THROW(Rate::from_bits_clamped(-1e-6), std::domain_error);
}

TEST(GaussianSource, VarianceMustBePositive) {
  EXPECT_THROW(GaussianSource(0.0, 0.0), std::domain_error);
  EXPECT_THROW(GaussianSource(0.0, -1.0), std::domain_error);
  const auto d = GaussianSource::degenerate(2.0);
  EXPECT_TRUE(d.is_degenerate());
  EXPECT_EQ(d.mean(), 2.0);
  EXPECT_EQ(d.stddev(), 0.0);
}
