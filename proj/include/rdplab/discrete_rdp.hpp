// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Finite-alphabet rate-distortion-perception function
//   R(D, P) = min I(X; Xhat)  s.t.  E[Delta(X, Xhat)] <= D,  d(pX, pXhat) <= P
// with d either total variation or squared W2 on the real line.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rdplab/channel.hpp"
#include "rdplab/numeric.hpp"
#include "rdplab/one_shot.hpp"
#include "rdplab/rng.hpp"
#include "rdplab/types.hpp"

namespace rdplab {

enum class PerceptionKind { TotalVariation, W2SquaredOnLine };

inline const char* to_string(PerceptionKind k) {
  return k == PerceptionKind::TotalVariation ? "total_variation"
                                             : "w2_squared_on_line";
}

/// Source pmf over m symbols, an m x n distortion matrix and the
/// reconstruction alphabet. Outputs 0..m-1 are the source symbols themselves
/// (Delta(x, x) = 0); outputs m..n-1 are extra reconstruction points.
struct DiscreteModel {
  std::vector<double> source_pmf;
  Matrix distortion;
  PerceptionKind perception_kind = PerceptionKind::TotalVariation;
  std::vector<double> output_points;  // positions for W2; default 0..n-1

  DiscreteModel(std::vector<double> pmf, Matrix delta,
                PerceptionKind kind = PerceptionKind::TotalVariation,
                std::vector<double> points = {})
      : source_pmf(std::move(pmf)),
        distortion(std::move(delta)),
        perception_kind(kind),
        output_points(std::move(points)) {
    if (output_points.empty()) {
      output_points.resize(distortion.cols());
      std::iota(output_points.begin(), output_points.end(), 0.0);
    }
    validate();
  }

  /// Hamming distortion on m symbols plus `extra_outputs` points at
  /// distortion 1 from every source symbol.
  static DiscreteModel hamming(std::vector<double> pmf,
                               PerceptionKind kind = PerceptionKind::TotalVariation,
                               std::size_t extra_outputs = 0) {
    const std::size_t m = pmf.size();
    Matrix d(m, m + extra_outputs, 1.0);
    for (std::size_t i = 0; i < m; ++i) d(i, i) = 0.0;
    return DiscreteModel(std::move(pmf), std::move(d), kind);
  }

  std::size_t inputs() const noexcept { return source_pmf.size(); }
  std::size_t outputs() const noexcept { return distortion.cols(); }

  /// Source pmf extended by zeros to the reconstruction alphabet.
  std::vector<double> source_on_outputs() const {
    std::vector<double> p(outputs(), 0.0);
    std::copy(source_pmf.begin(), source_pmf.end(), p.begin());
    return p;
  }

  void validate() const {
    const std::size_t m = inputs();
    if (m == 0) throw std::domain_error("DiscreteModel: empty alphabet");
    check_pmf(source_pmf, "DiscreteModel source_pmf");
    if (distortion.rows() != m)
      throw std::domain_error("DiscreteModel: distortion rows != alphabet size");
    if (distortion.cols() < m)
      throw std::domain_error(
          "DiscreteModel: reconstruction alphabet must contain the source alphabet");
    if (output_points.size() != distortion.cols())
      throw std::domain_error("DiscreteModel: output_points size mismatch");
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t y = 0; y < distortion.cols(); ++y) {
        const double v = distortion(x, y);
        if (!(v >= 0.0) || !std::isfinite(v))
          throw std::domain_error("DiscreteModel: distortion must be finite and >= 0");
        if ((v == 0.0) != (x == y))
          throw std::domain_error(
              "DiscreteModel: Delta(x, y) must vanish exactly on the diagonal");
      }
    for (double t : output_points)
      if (!std::isfinite(t))
        throw std::domain_error("DiscreteModel: output_points must be finite");
  }
};

/// Total variation 1/2 sum |a - b|.
inline double total_variation(std::span<const double> a,
                              std::span<const double> b) {
  if (a.size() != b.size()) throw std::domain_error("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

namespace detail {

/// Quantile (monotone) coupling of two pmfs on common points, as a list of
/// (i, j, mass) triples.
struct Flow {
  std::size_t from, to;
  double mass;
};

inline std::vector<Flow> monotone_coupling(std::span<const double> points,
                                           std::span<const double> a,
                                           std::span<const double> b) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return points[i] < points[j];
  });
  std::vector<Flow> flows;
  std::size_t ia = 0, ib = 0;
  double ra = a[order[0]], rb = b[order[0]];
  const std::size_t n = order.size();
  while (ia < n && ib < n) {
    const double w = std::min(ra, rb);
    if (w > 0.0) flows.push_back({order[ia], order[ib], w});
    ra -= w;
    rb -= w;
    if (ra <= 0.0 && ++ia < n) ra = a[order[ia]];
    if (rb <= 0.0 && ++ib < n) rb = b[order[ib]];
  }
  return flows;
}

}  // namespace detail

/// Squared W2 between two pmfs supported on the same points of the line.
inline double w2_squared_on_line(std::span<const double> points,
                                 std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != points.size() || b.size() != points.size() || points.empty())
    throw std::domain_error("w2_squared_on_line: size mismatch");
  double s = 0.0;
  for (const auto& f : detail::monotone_coupling(points, a, b)) {
    const double d = points[f.from] - points[f.to];
    s += f.mass * d * d;
  }
  return s;
}

/// d(pX, q) for an output marginal q.
inline double perception(const DiscreteModel& model, std::span<const double> q) {
  const auto p = model.source_on_outputs();
  return model.perception_kind == PerceptionKind::TotalVariation
             ? total_variation(p, q)
             : w2_squared_on_line(model.output_points, p, q);
}

struct Evaluation {
  Rate rate;
  double distortion = 0.0;
  double perception = 0.0;
  bool feasible = false;
};

inline constexpr double kFeasibilitySlack = 1e-12;

inline bool satisfies(double value, const Bound& b) {
  return b.is_unconstrained() || value <= b.value() + kFeasibilitySlack;
}

inline double expected_distortion(const DiscreteModel& model,
                                  const ChannelMatrix& w) {
  double d = 0.0;
  for (std::size_t x = 0; x < model.inputs(); ++x)
    for (std::size_t y = 0; y < model.outputs(); ++y)
      d += model.source_pmf[x] * w(x, y) * model.distortion(x, y);
  return d;
}

inline Evaluation evaluate(const DiscreteModel& model, const ChannelMatrix& w,
                           const ConstraintPair& c) {
  if (w.inputs() != model.inputs() || w.outputs() != model.outputs())
    throw std::domain_error("evaluate: channel dimensions do not match the model");
  Evaluation e;
  e.rate = Rate::from_bits_clamped(mutual_information_bits(model.source_pmf, w));
  e.distortion = expected_distortion(model, w);
  e.perception = perception(model, output_marginal(model.source_pmf, w));
  e.feasible = satisfies(e.distortion, c.distortion) &&
               satisfies(e.perception, c.perception);
  return e;
}

struct SolveOptions {
  double tolerance = 1e-6;  // bits
  int max_iters = 5000;     // total Newton steps
  std::uint64_t seed = 0;
};

enum class SolveStatus { Solved, Infeasible };

struct SolveResult {
  SolveStatus status = SolveStatus::Solved;
  Rate rate = Rate::infinite();
  std::optional<ChannelMatrix> channel;
  double distortion = 0.0;
  double perception = 0.0;
  int iterations = 0;
  std::string message;
};

/// Raised when the solver exhausts its budget; carries the best feasible
/// channel found.
class SolverConvergenceError : public NumericalError {
 public:
  SolverConvergenceError(const std::string& what, ChannelMatrix best, Rate rate)
      : NumericalError(what), best_(std::move(best)), rate_(rate) {}
  const ChannelMatrix& best_channel() const noexcept { return best_; }
  Rate best_rate() const noexcept { return rate_; }

 private:
  ChannelMatrix best_;
  Rate rate_;
};

namespace detail {

/// Cost between source symbol x and output y for the perception coupling.
inline Matrix perception_cost(const DiscreteModel& model) {
  const std::size_t m = model.inputs(), n = model.outputs();
  Matrix c(m, n);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (model.perception_kind == PerceptionKind::TotalVariation) {
        c(x, y) = x == y ? 0.0 : 1.0;
      } else {
        const double d = model.output_points[x] - model.output_points[y];
        c(x, y) = d * d;
      }
    }
  return c;
}

/// Markov kernel T on outputs with q T = target, taken from an optimal
/// coupling of q and target.
inline Matrix transport_kernel(const DiscreteModel& model,
                               std::span<const double> q,
                               std::span<const double> target) {
  const std::size_t n = q.size();
  Matrix t(n, n);
  if (model.perception_kind == PerceptionKind::W2SquaredOnLine) {
    for (const auto& f : monotone_coupling(model.output_points, q, target))
      t(f.from, f.to) += f.mass;
  } else {
    // Keep the common mass, move the surplus onto the deficit proportionally.
    double deficit = 0.0;
    for (std::size_t y = 0; y < n; ++y) deficit += std::max(0.0, target[y] - q[y]);
    for (std::size_t y = 0; y < n; ++y) {
      t(y, y) = std::min(q[y], target[y]);
      const double surplus = std::max(0.0, q[y] - target[y]);
      if (surplus > 0.0 && deficit > 0.0)
        for (std::size_t z = 0; z < n; ++z)
          t(y, z) += surplus * std::max(0.0, target[z] - q[z]) / deficit;
    }
  }
  for (std::size_t y = 0; y < n; ++y) {
    double s = 0.0;
    for (std::size_t z = 0; z < n; ++z) s += t(y, z);
    if (s <= 0.0) {
      for (std::size_t z = 0; z < n; ++z) t(y, z) = 0.0;
      t(y, y) = 1.0;
    } else {
      for (std::size_t z = 0; z < n; ++z) t(y, z) /= s;
    }
  }
  return t;
}

inline Matrix normalized_rows(Matrix w) {
  for (std::size_t x = 0; x < w.rows(); ++x) {
    auto r = w.row(x);
    double s = 0.0;
    for (double v : r) s += v;
    for (double& v : r) v /= s;
  }
  return w;
}

inline std::vector<double> marginal(std::span<const double> p, const Matrix& w) {
  std::vector<double> q(w.cols(), 0.0);
  for (std::size_t x = 0; x < w.rows(); ++x)
    for (std::size_t y = 0; y < w.cols(); ++y) q[y] += p[x] * w(x, y);
  return q;
}

/// Makes a channel exactly feasible. Composing with an output transport
/// toward pX cannot raise the rate and shrinks the perception term; mixing
/// with the identity embedding then scales distortion and perception by the
/// same factor.
inline Matrix repair(const DiscreteModel& model, const ConstraintPair& c,
                     Matrix w) {
  const std::size_t m = model.inputs(), n = model.outputs();
  const auto p = model.source_on_outputs();
  auto perc_of = [&](const Matrix& v) {
    return perception(model, marginal(model.source_pmf, v));
  };
  if (c.perception.is_finite()) {
    const double bound = c.perception.value();
    const double perc = perc_of(w);
    if (perc > bound) {
      const auto q = marginal(model.source_pmf, w);
      const Matrix t = transport_kernel(model, q, p);
      auto compose = [&](double alpha) {
        Matrix out(m, n);
        for (std::size_t x = 0; x < m; ++x)
          for (std::size_t y = 0; y < n; ++y) {
            const double wy = w(x, y);
            if (wy == 0.0) continue;
            out(x, y) += (1.0 - alpha) * wy;
            for (std::size_t z = 0; z < n; ++z) out(x, z) += alpha * wy * t(y, z);
          }
        return normalized_rows(std::move(out));
      };
      // Convexity gives perception <= (1 - alpha) perc; bisect off round-off.
      double lo = std::min(1.0, 1.0 - bound / perc), hi = 1.0;
      Matrix cand = compose(lo);
      if (perc_of(cand) > bound) {
        for (int k = 0; k < 60; ++k) {
          const double mid = 0.5 * (lo + hi);
          (perc_of(compose(mid)) > bound ? lo : hi) = mid;
        }
        cand = compose(hi);
      }
      w = std::move(cand);
    }
  }
  if (c.distortion.is_finite()) {
    const double bound = c.distortion.value();
    const double d = expected_distortion(model, ChannelMatrix::trusted(w));
    if (d > bound) {
      auto mix = [&](double keep) {
        Matrix cand(m, n);
        for (std::size_t x = 0; x < m; ++x) {
          for (std::size_t y = 0; y < n; ++y) cand(x, y) = keep * w(x, y);
          cand(x, x) += 1.0 - keep;
        }
        return cand;
      };
      auto dist_of = [&](const Matrix& v) {
        return expected_distortion(model, ChannelMatrix::trusted(v));
      };
      double lo = 0.0, hi = bound / d;
      if (dist_of(mix(hi)) > bound) {
        for (int k = 0; k < 60; ++k) {
          const double mid = 0.5 * (lo + hi);
          (dist_of(mix(mid)) > bound ? hi : lo) = mid;
        }
        hi = lo;
      }
      w = mix(hi);
    }
  }
  return w;
}

/// Log-barrier interior-point method. The perception constraint is
/// linearized by an explicit coupling K between pX and the output marginal:
/// d(pX, pW) <= P iff some row-stochastic K has pK = pW and <diag(p) K, c> <= P.
/// Variables are the W entries (and K entries when P > 0) of input rows with
/// positive mass; P = 0 is imposed directly as pW = pX.
class BarrierSolver {
 public:
  BarrierSolver(const DiscreteModel& model, const ConstraintPair& c,
                const SolveOptions& opts)
      : model_(model),
        use_d_(c.distortion.is_finite()),
        use_k_(c.perception.is_finite() && c.perception.value() > 0.0),
        exact_marginal_(c.perception.is_finite() && c.perception.value() == 0.0),
        d_(c.distortion.value_or(0.0)),
        pb_(c.perception.value_or(0.0)) {
    for (std::size_t x = 0; x < model.inputs(); ++x)
      if (model.source_pmf[x] > 0.0) rows_.push_back(x);
    if (exact_marginal_) {
      cols_ = rows_;
    } else {
      cols_.resize(model.outputs());
      std::iota(cols_.begin(), cols_.end(), std::size_t{0});
    }
    r_ = rows_.size();
    k_ = cols_.size();
    block_ = r_ * k_;
    nvar_ = use_k_ ? 2 * block_ : block_;
    cost_ = perception_cost(model);
    build_equalities();
    z_ = start_point(opts.seed);
  }

  /// Number of inequality constraints, which sets the duality gap m / t.
  double inequality_count() const {
    return static_cast<double>(nvar_) + (use_d_ ? 1.0 : 0.0) + (use_k_ ? 1.0 : 0.0);
  }

  /// Barrier continuation until the duality gap is below gap_nats. Returns
  /// false when the Newton budget runs out first.
  bool run(double gap_nats, int max_newton) {
    double t = std::max(1.0, inequality_count());
    const double mu = 8.0;
    while (true) {
      if (!center(t, max_newton)) return false;
      if (inequality_count() / t <= gap_nats) return true;
      t *= mu;
    }
  }

  int newton_steps() const noexcept { return steps_; }
  double gap(double t) const { return inequality_count() / t; }

  /// Current channel on the full alphabet; rows without mass use the identity
  /// embedding.
  Matrix channel() const {
    const std::size_t m = model_.inputs(), n = model_.outputs();
    Matrix w(m, n);
    for (std::size_t x = 0; x < m; ++x) w(x, x) = 1.0;
    for (std::size_t i = 0; i < r_; ++i) {
      const std::size_t x = rows_[i];
      w(x, x) = 0.0;
      double s = 0.0;
      for (std::size_t j = 0; j < k_; ++j) s += z_[i * k_ + j];
      for (std::size_t j = 0; j < k_; ++j) w(x, cols_[j]) = z_[i * k_ + j] / s;
    }
    return w;
  }

 private:
  using Vec = Eigen::VectorXd;
  using Mat = Eigen::MatrixXd;

  double p(std::size_t i) const { return model_.source_pmf[rows_[i]]; }
  double delta(std::size_t i, std::size_t j) const {
    return model_.distortion(rows_[i], cols_[j]);
  }
  double cost(std::size_t i, std::size_t j) const {
    return cost_(rows_[i], cols_[j]);
  }

  void build_equalities() {
    // Row sums of W (and K), then marginal matches up to one redundant column.
    const std::size_t n_marg = (use_k_ || exact_marginal_) ? k_ - 1 : 0;
    const std::size_t neq = r_ * (use_k_ ? 2 : 1) + n_marg;
    a_ = Mat::Zero(static_cast<Eigen::Index>(neq), static_cast<Eigen::Index>(nvar_));
    std::size_t e = 0;
    for (std::size_t i = 0; i < r_; ++i, ++e)
      for (std::size_t j = 0; j < k_; ++j) a_(e, i * k_ + j) = 1.0;
    if (use_k_)
      for (std::size_t i = 0; i < r_; ++i, ++e)
        for (std::size_t j = 0; j < k_; ++j) a_(e, block_ + i * k_ + j) = 1.0;
    for (std::size_t j = 0; j < n_marg; ++j, ++e)
      for (std::size_t i = 0; i < r_; ++i) {
        a_(e, i * k_ + j) = p(i);
        if (use_k_) a_(e, block_ + i * k_ + j) = -p(i);
      }
  }

  Vec start_point(std::uint64_t seed) const {
    Vec z(static_cast<Eigen::Index>(nvar_));
    const std::size_t n = k_;
    // Source pmf on the active columns.
    std::vector<double> pc(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (cols_[j] < model_.inputs()) pc[j] = model_.source_pmf[cols_[j]];
    double pc_sum = 0.0;
    for (double v : pc) pc_sum += v;
    for (double& v : pc) v /= pc_sum;
    // Mixing rows R: pX itself under the exact-marginal constraint, otherwise
    // a seeded positive perturbation of it.
    Matrix rmix(r_, n);
    Rng rng(RngSpec{seed, 0}, StreamTag::Inputs, 0x5eed);
    for (std::size_t i = 0; i < r_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        rmix(i, j) = exact_marginal_
                         ? pc[j]
                         : pc[j] + (1.0 + 0.1 * rng.uniform()) / static_cast<double>(n);
        s += rmix(i, j);
      }
      for (std::size_t j = 0; j < n; ++j) rmix(i, j) /= s;
    }
    std::vector<double> qr(n, 0.0);
    double d_mix = 0.0, c_ind = 0.0;
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        qr[j] += p(i) * rmix(i, j);
        d_mix += p(i) * rmix(i, j) * delta(i, j);
      }
    double t = 0.5;
    if (use_d_ && d_mix > 0.0) t = std::min(t, 0.5 * d_ / d_mix);
    std::vector<double> q0(n);
    auto embed = [&](std::size_t i, std::size_t j) {
      return cols_[j] == rows_[i] ? 1.0 : 0.0;
    };
    auto set_q0 = [&] {
      for (std::size_t j = 0; j < n; ++j) q0[j] = (1.0 - t) * pc[j] + t * qr[j];
    };
    set_q0();
    if (use_k_) {
      // Perception of q0 is at most t perception(qR) by convexity.
      const double perc_r = perception(model_, qr);
      if (perc_r > 0.0) t = std::min(t, 0.25 * pb_ / perc_r);
      set_q0();
    }
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < n; ++j)
        z[static_cast<Eigen::Index>(i * n + j)] =
            (1.0 - t) * embed(i, j) + t * rmix(i, j);
    if (use_k_) {
      const auto pe = model_.source_on_outputs();
      const Matrix kern = transport_kernel(model_, pe, q0);
      for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < n; ++j) c_ind += p(i) * q0[j] * cost(i, j);
      const double u = c_ind > 0.0 ? std::min(0.5, 0.25 * pb_ / c_ind) : 0.5;
      for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < n; ++j)
          z[static_cast<Eigen::Index>(block_ + i * n + j)] =
              (1.0 - u) * kern(rows_[i], j) + u * q0[j];
    }
    return z;
  }

  // Slacks of the two scalar inequalities (positive when strictly feasible).
  double dist_slack(const Vec& z) const {
    double s = 0.0;
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < k_; ++j) s += p(i) * z[i * k_ + j] * delta(i, j);
    return d_ - s;
  }
  double perc_slack(const Vec& z) const {
    double s = 0.0;
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < k_; ++j)
        s += p(i) * z[block_ + i * k_ + j] * cost(i, j);
    return pb_ - s;
  }

  bool interior(const Vec& z) const {
    for (Eigen::Index i = 0; i < z.size(); ++i)
      if (!(z[i] > 0.0)) return false;
    if (use_d_ && !(dist_slack(z) > 0.0)) return false;
    if (use_k_ && !(perc_slack(z) > 0.0)) return false;
    return true;
  }

  std::vector<double> out_marginal(const Vec& z) const {
    std::vector<double> q(k_, 0.0);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < k_; ++j) q[j] += p(i) * z[i * k_ + j];
    return q;
  }

  // Mutual information in nats on the active rows and columns.
  double info(const Vec& z) const {
    const auto q = out_marginal(z);
    double s = 0.0;
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < k_; ++j) {
        const double v = z[i * k_ + j];
        s += p(i) * v * std::log(v / q[j]);
      }
    return s;
  }

  double phi(const Vec& z, double t) const {
    double v = t * info(z);
    for (Eigen::Index i = 0; i < z.size(); ++i) v -= std::log(z[i]);
    if (use_d_) v -= std::log(dist_slack(z));
    if (use_k_) v -= std::log(perc_slack(z));
    return v;
  }

  bool center(double t, int max_newton) {
    const auto ni = static_cast<Eigen::Index>(nvar_);
    const auto ne = a_.rows();
    for (int it = 0; it < 200; ++it) {
      if (steps_ >= max_newton) return false;
      ++steps_;
      const auto q = out_marginal(z_);
      Vec g = Vec::Zero(ni);
      Mat h = Mat::Zero(ni, ni);
      for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < k_; ++j) {
          const auto a = static_cast<Eigen::Index>(i * k_ + j);
          const double v = z_[a];
          g[a] = t * p(i) * std::log(v / q[j]);
          h(a, a) += t * p(i) / v;
          for (std::size_t i2 = 0; i2 < r_; ++i2)
            h(a, static_cast<Eigen::Index>(i2 * k_ + j)) -= t * p(i) * p(i2) / q[j];
        }
      for (Eigen::Index a = 0; a < ni; ++a) {
        g[a] -= 1.0 / z_[a];
        h(a, a) += 1.0 / (z_[a] * z_[a]);
      }
      auto add_linear = [&](double slack, auto coef) {
        Vec row = Vec::Zero(ni);
        for (std::size_t i = 0; i < r_; ++i)
          for (std::size_t j = 0; j < k_; ++j) coef(row, i, j);
        g += row / slack;
        h += row * row.transpose() / (slack * slack);
      };
      if (use_d_)
        add_linear(dist_slack(z_), [&](Vec& row, std::size_t i, std::size_t j) {
          row[static_cast<Eigen::Index>(i * k_ + j)] = p(i) * delta(i, j);
        });
      if (use_k_)
        add_linear(perc_slack(z_), [&](Vec& row, std::size_t i, std::size_t j) {
          row[static_cast<Eigen::Index>(block_ + i * k_ + j)] = p(i) * cost(i, j);
        });

      Mat kkt = Mat::Zero(ni + ne, ni + ne);
      kkt.topLeftCorner(ni, ni) = h;
      kkt.topRightCorner(ni, ne) = a_.transpose();
      kkt.bottomLeftCorner(ne, ni) = a_;
      Vec rhs = Vec::Zero(ni + ne);
      rhs.head(ni) = -g;
      const Vec sol = kkt.partialPivLu().solve(rhs);
      const Vec dz = sol.head(ni);
      const double dec = -g.dot(dz);
      if (!std::isfinite(dec)) return false;
      if (dec <= 2e-12) return true;

      const double f0 = phi(z_, t);
      double s = 1.0;
      Vec cand = z_ + s * dz;
      while (!interior(cand)) {
        s *= 0.5;
        if (s < 1e-30) return false;
        cand = z_ + s * dz;
      }
      while (phi(cand, t) > f0 - 0.25 * s * dec) {
        s *= 0.5;
        if (s < 1e-30) return dec <= 1e-8;
        cand = z_ + s * dz;
      }
      z_ = std::move(cand);
    }
    return true;
  }

  const DiscreteModel& model_;
  bool use_d_, use_k_, exact_marginal_;
  double d_, pb_;
  std::vector<std::size_t> rows_, cols_;
  std::size_t r_ = 0, k_ = 0, block_ = 0, nvar_ = 0;
  Matrix cost_;
  Mat a_;
  Vec z_;
  int steps_ = 0;
};

}  // namespace detail

/// Minimizes I(X; Xhat) over channels meeting both constraints. The returned
/// channel is exactly feasible and its rate is within opts.tolerance bits of
/// the infimum (certified by the barrier duality gap).
inline SolveResult solve(const DiscreteModel& model, const ConstraintPair& c,
                         const SolveOptions& opts = {}) {
  model.validate();
  SolveResult res;
  if ((c.distortion.is_finite() && c.distortion.value() < 0.0) ||
      (c.perception.is_finite() && c.perception.value() < 0.0)) {
    res.status = SolveStatus::Infeasible;
    res.message = "negative constraint target: no channel is feasible";
    return res;
  }
  if (!(opts.tolerance > 0.0) || opts.max_iters < 1)
    throw std::domain_error("solve: tolerance and max_iters must be positive");

  auto finish = [&](Matrix w, int iters) {
    w = detail::repair(model, c, std::move(w));
    auto ch = ChannelMatrix::trusted(std::move(w));
    const auto e = evaluate(model, ch, c);
    res.rate = e.rate;
    res.distortion = e.distortion;
    res.perception = e.perception;
    res.iterations = iters;
    res.channel = std::move(ch);
    return res;
  };

  const std::size_t m = model.inputs(), n = model.outputs();
  std::size_t support = 0;
  for (double v : model.source_pmf) support += v > 0.0;
  if (c.distortion.is_unconstrained() && c.perception.is_unconstrained()) {
    // Every row equal to pX: zero information, zero perception.
    Matrix w(m, n);
    const auto pe = model.source_on_outputs();
    for (std::size_t x = 0; x < m; ++x) std::copy(pe.begin(), pe.end(), w.row(x).begin());
    return finish(std::move(w), 0);
  }
  if (support == 1 || (c.distortion.is_finite() && c.distortion.value() == 0.0)) {
    // Only the identity embedding has zero distortion; a point mass costs
    // nothing to describe.
    return finish(ChannelMatrix::identity(m, n).matrix(), 0);
  }

  detail::BarrierSolver barrier(model, c, opts);
  const bool ok = barrier.run(0.5 * opts.tolerance * numeric::kLn2, opts.max_iters);
  if (!ok) {
    const Matrix best = detail::repair(model, c, barrier.channel());
    const auto ch = ChannelMatrix::trusted(best);
    const auto e = evaluate(model, ch, c);
    throw SolverConvergenceError("solve: no convergence within max_iters", ch,
                                 e.rate);
  }
  return finish(barrier.channel(), barrier.newton_steps());
}

/// Exhaustive scan of binary channels W = [[1-a, a], [b, 1-b]]. Both
/// constraints are linear in (a, b), so for each grid value of a the feasible
/// b form an interval whose endpoints are scanned together with the grid;
/// the a-coordinates of the feasible polygon's vertices are added to the grid.
inline Rate brute_force_oracle(const DiscreteModel& model,
                               const ConstraintPair& c, double grid_resolution) {
  if (model.inputs() != 2 || model.outputs() != 2)
    throw std::invalid_argument("brute_force_oracle: only binary models are supported");
  if (!(grid_resolution > 0.0) || grid_resolution > 0.5)
    throw std::domain_error("brute_force_oracle: resolution must lie in (0, 0.5]");
  if ((c.distortion.is_finite() && c.distortion.value() < 0.0) ||
      (c.perception.is_finite() && c.perception.value() < 0.0))
    return Rate::infinite();

  const double p0 = model.source_pmf[0], p1 = model.source_pmf[1];
  struct Line {
    double ca, cb, rhs;  // ca a + cb b <= rhs
  };
  std::vector<Line> lines;
  if (c.distortion.is_finite())
    lines.push_back({p0 * model.distortion(0, 1), p1 * model.distortion(1, 0),
                     c.distortion.value()});
  if (c.perception.is_finite()) {
    double k = 1.0;
    if (model.perception_kind == PerceptionKind::W2SquaredOnLine) {
      const double d = model.output_points[1] - model.output_points[0];
      k = d * d;
    }
    // q1 - p1 = p0 a - p1 b
    lines.push_back({k * p0, -k * p1, c.perception.value()});
    lines.push_back({-k * p0, k * p1, c.perception.value()});
  }
  const double slack = 1e-13;

  auto interval = [&](double a, double& lo, double& hi) {
    lo = 0.0;
    hi = 1.0;
    for (const auto& l : lines) {
      const double r = l.rhs - l.ca * a;
      if (l.cb > 0.0) {
        hi = std::min(hi, r / l.cb);
      } else if (l.cb < 0.0) {
        lo = std::max(lo, r / l.cb);
      } else if (r < -slack) {
        return false;
      }
    }
    if (lo > hi && lo - hi < slack) lo = hi;
    return lo <= hi;
  };

  auto mi = [&](double a, double b) {
    const double q0 = p0 * (1.0 - a) + p1 * b, q1 = 1.0 - q0;
    auto term = [](double w, double q) { return w > 0.0 ? w * std::log2(w / q) : 0.0; };
    const double v = p0 * (term(1.0 - a, q0) + term(a, q1)) +
                     p1 * (term(b, q0) + term(1.0 - b, q1));
    return std::max(0.0, v);
  };

  std::vector<double> as;
  const auto steps = static_cast<std::size_t>(std::ceil(1.0 / grid_resolution));
  for (std::size_t i = 0; i <= steps; ++i)
    as.push_back(std::min(1.0, static_cast<double>(i) * grid_resolution));
  std::vector<Line> all = lines;
  all.push_back({0.0, 1.0, 0.0});
  all.push_back({0.0, 1.0, 1.0});
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double det = all[i].ca * all[j].cb - all[j].ca * all[i].cb;
      if (std::abs(det) < 1e-300) continue;
      const double a = (all[i].rhs * all[j].cb - all[j].rhs * all[i].cb) / det;
      if (a >= 0.0 && a <= 1.0) as.push_back(a);
    }
  std::sort(as.begin(), as.end());

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<double> best(workers, std::numeric_limits<double>::infinity());
  auto scan = [&](unsigned w) {
    double local = std::numeric_limits<double>::infinity();
    for (std::size_t i = w; i < as.size(); i += workers) {
      const double a = as[i];
      double lo, hi;
      if (!interval(a, lo, hi)) continue;
      local = std::min({local, mi(a, lo), mi(a, hi)});
      const auto first = static_cast<std::size_t>(std::ceil(lo / grid_resolution));
      for (std::size_t j = first;; ++j) {
        const double b = static_cast<double>(j) * grid_resolution;
        if (b > hi) break;
        local = std::min(local, mi(a, b));
      }
    }
    best[w] = local;
  };
  if (workers == 1) {
    scan(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(scan, w);
    for (auto& t : pool) t.join();
  }
  const double v = *std::min_element(best.begin(), best.end());
  return std::isfinite(v) ? Rate(v) : Rate::infinite();
}

}  // namespace rdplab
