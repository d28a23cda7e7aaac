// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rdplab/numeric.hpp"

namespace rdplab {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw std::domain_error("Matrix: ragged rows");
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void check_pmf(std::span<const double> p, const char* what) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::domain_error(std::string(what) + ": negative mass");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw std::domain_error(std::string(what) + ": does not sum to 1");
}

/// Conditional pmf p(xhat | x), one row per input symbol.
class ChannelMatrix {
 public:
  explicit ChannelMatrix(Matrix m) : m_(std::move(m)) {
    for (std::size_t i = 0; i < m_.rows(); ++i) check_pmf(m_.row(i), "ChannelMatrix row");
  }
  static ChannelMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    return ChannelMatrix(Matrix::from_rows(rows));
  }
  /// Takes ownership without validation; callers guarantee stochastic rows.
  static ChannelMatrix trusted(Matrix m) {
    ChannelMatrix c;
    c.m_ = std::move(m);
    return c;
  }
  static ChannelMatrix identity(std::size_t m, std::size_t n) {
    Matrix id(m, n);
    for (std::size_t i = 0; i < m && i < n; ++i) id(i, i) = 1.0;
    return ChannelMatrix(std::move(id));
  }

  std::size_t inputs() const noexcept { return m_.rows(); }
  std::size_t outputs() const noexcept { return m_.cols(); }
  double operator()(std::size_t x, std::size_t y) const { return m_(x, y); }
  std::span<const double> row(std::size_t x) const { return m_.row(x); }
  const Matrix& matrix() const noexcept { return m_; }

 private:
  ChannelMatrix() = default;
  Matrix m_;
};

/// Output marginal q(y) = sum_x p(x) W(y|x).
inline std::vector<double> output_marginal(std::span<const double> input_pmf,
                                           const ChannelMatrix& w) {
  if (input_pmf.size() != w.inputs())
    throw std::domain_error("output_marginal: dimension mismatch");
  std::vector<double> q(w.outputs(), 0.0);
  for (std::size_t x = 0; x < w.inputs(); ++x)
    for (std::size_t y = 0; y < w.outputs(); ++y) q[y] += input_pmf[x] * w(x, y);
  return q;
}

/// I(X; Y) in bits as sum_x p(x) sum_y W log2(W / q).
inline double mutual_information_bits(std::span<const double> input_pmf,
                                      const ChannelMatrix& w) {
  const auto q = output_marginal(input_pmf, w);
  double info = 0.0;
  for (std::size_t x = 0; x < w.inputs(); ++x) {
    if (input_pmf[x] == 0.0) continue;
    for (std::size_t y = 0; y < w.outputs(); ++y) {
      const double v = w(x, y);
      if (v > 0.0) info += input_pmf[x] * v * std::log2(v / q[y]);
    }
  }
  return std::max(0.0, info);
}

}  // namespace rdplab
