// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>

#include "rdplab/types.hpp"

namespace rdplab {

/// Expected codeword length budget for losslessly describing a representation
/// with mutual information `bits` using shared randomness:
/// bits + log2(bits + 1) + 5.
inline double functional_representation_overhead(double bits) {
  if (bits < 0.0) throw std::domain_error("overhead: negative information");
  return bits + std::log2(bits + 1.0) + 5.0;
}

struct RateSandwich {
  Rate lower;
  Rate upper;
};

/// One-shot universal rate bounds R(theta) <= R* <= R(theta) + log2(R+1) + 5.
inline RateSandwich sandwich(Rate theta_rate) {
  if (!theta_rate.is_finite()) return {theta_rate, theta_rate};
  return {theta_rate,
          Rate(functional_representation_overhead(theta_rate.bits()))};
}

}  // namespace rdplab
