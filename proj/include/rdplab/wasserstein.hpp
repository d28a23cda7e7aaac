// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rdplab {

/// Empirical squared W2 between two scalar samples via the quantile coupling.
/// Unequal lengths are compared on a common grid of min(len) mid-quantiles.
inline double empirical_w2(std::span<const double> a,
                           std::span<const double> b) {
  if (a.empty() || b.empty())
    throw std::domain_error("empirical_w2: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const std::size_t k = std::min(sa.size(), sb.size());
  auto pick = [k](const std::vector<double>& s, std::size_t i) {
    if (s.size() == k) return s[i];
    // Mid-quantile (i + 1/2) / k mapped to an order statistic.
    const std::size_t j = ((2 * i + 1) * s.size()) / (2 * k);
    return s[std::min(j, s.size() - 1)];
  };
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = pick(sa, i) - pick(sb, i);
    acc += d * d;
  }
  return acc / static_cast<double>(k);
}

}  // namespace rdplab
