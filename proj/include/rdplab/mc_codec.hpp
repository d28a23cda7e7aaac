// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Monte Carlo codec layer: scalar lattice quantizers with and without
// shared dither, empirical rate/distortion/perception measurement, a fixed
// encoder swept over an affine decoder family, and one-shot channel
// simulation with a Poisson functional representation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "rdplab/channel.hpp"
#include "rdplab/numeric.hpp"
#include "rdplab/rng.hpp"
#include "rdplab/types.hpp"
#include "rdplab/wasserstein.hpp"

namespace rdplab {

enum class QuantizerMode { DQ, UQ, NQ };

inline const char* to_string(QuantizerMode m) {
  switch (m) {
    case QuantizerMode::DQ: return "DQ";
    case QuantizerMode::UQ: return "UQ";
    case QuantizerMode::NQ: return "NQ";
  }
  return "?";
}

/// Uniform scalar lattice step * Z. UQ adds a shared dither before rounding
/// and subtracts it after; NQ rounds the clean value and the decoder adds
/// private uniform noise; DQ rounds only.
struct DitherQuantizer {
  double step = 1.0;
  QuantizerMode mode = QuantizerMode::UQ;

  DitherQuantizer(double step_, QuantizerMode mode_) : step(step_), mode(mode_) {
    if (!(step > 0.0) || !std::isfinite(step))
      throw std::domain_error("DitherQuantizer: step must be positive");
  }
};

struct Quantized {
  std::int64_t index;
  double reconstruction;
};

/// Nearest lattice index, ties away from zero.
inline std::int64_t lattice_index(double v, double step) {
  return static_cast<std::int64_t>(std::round(v / step));
}

/// Subtractive-dither round trip: index = Q(y + u), recon = index*step - u.
inline Quantized uq_roundtrip(double y, double u, const DitherQuantizer& q) {
  if (!std::isfinite(y)) throw std::domain_error("uq_roundtrip: non-finite input");
  if (std::abs(u) > 0.5 * q.step)
    throw std::domain_error("uq_roundtrip: dither outside [-step/2, step/2]");
  const auto k = lattice_index(y + u, q.step);
  return {k, static_cast<double>(k) * q.step - u};
}

/// Samples per chunk. Each chunk draws from its own substream, so results do
/// not depend on how chunks are assigned to workers.
inline constexpr std::size_t kChunkSize = std::size_t{1} << 14;

namespace detail {

template <class Fn>
void for_each_chunk(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  if (workers <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c)
      fn(c, c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers)
        fn(c, c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// n source draws from N(mean, var).
inline std::vector<double> source_samples(const GaussianSource& src,
                                          const RngSpec& spec, std::size_t n,
                                          unsigned workers = 1) {
  std::vector<double> x(n);
  const double sigma = src.stddev();
  detail::for_each_chunk(n, workers, [&](std::size_t c, std::size_t lo,
                                         std::size_t hi) {
    Rng rng(spec, StreamTag::Source, c);
    for (std::size_t i = lo; i < hi; ++i) x[i] = src.mean() + sigma * rng.normal();
  });
  return x;
}

/// The shared dither sequence. Encoder and decoder both call this with the
/// same RngSpec and obtain identical values.
inline std::vector<double> shared_dither(const RngSpec& spec, std::size_t n,
                                         double step, unsigned workers = 1) {
  std::vector<double> u(n);
  detail::for_each_chunk(n, workers, [&](std::size_t c, std::size_t lo,
                                         std::size_t hi) {
    Rng rng(spec, StreamTag::SharedDither, c);
    for (std::size_t i = lo; i < hi; ++i)
      u[i] = std::min(0.5 * step, rng.uniform(-0.5 * step, 0.5 * step));
  });
  return u;
}

/// Decoder-private noise for NQ.
inline std::vector<double> decoder_noise(const RngSpec& spec, std::size_t n,
                                         double step, unsigned workers = 1) {
  std::vector<double> u(n);
  detail::for_each_chunk(n, workers, [&](std::size_t c, std::size_t lo,
                                         std::size_t hi) {
    Rng rng(spec, StreamTag::DecoderNoise, c);
    for (std::size_t i = lo; i < hi; ++i)
      u[i] = rng.uniform(-0.5 * step, 0.5 * step);
  });
  return u;
}

/// One encoder pass over a source sample.
struct EncodedBatch {
  DitherQuantizer quantizer;
  std::vector<double> x;
  std::vector<std::int64_t> index;
  std::vector<double> dither;  // shared dither (UQ only; empty otherwise)
  std::vector<double> recon;   // value handed to the decoder family
};

inline EncodedBatch encode_batch(std::vector<double> x,
                                 const DitherQuantizer& q, const RngSpec& spec,
                                 unsigned workers = 1) {
  const std::size_t n = x.size();
  EncodedBatch b{q, std::move(x), std::vector<std::int64_t>(n), {},
                 std::vector<double>(n)};
  switch (q.mode) {
    case QuantizerMode::UQ: {
      b.dither = shared_dither(spec, n, q.step, workers);
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = uq_roundtrip(b.x[i], b.dither[i], q);
        b.index[i] = r.index;
        b.recon[i] = r.reconstruction;
      }
      break;
    }
    case QuantizerMode::DQ:
      for (std::size_t i = 0; i < n; ++i) {
        b.index[i] = lattice_index(b.x[i], q.step);
        b.recon[i] = static_cast<double>(b.index[i]) * q.step;
      }
      break;
    case QuantizerMode::NQ: {
      const auto noise = decoder_noise(spec, n, q.step, workers);
      for (std::size_t i = 0; i < n; ++i) {
        b.index[i] = lattice_index(b.x[i], q.step);
        b.recon[i] = static_cast<double>(b.index[i]) * q.step + noise[i];
      }
      break;
    }
  }
  return b;
}

inline EncodedBatch encode_batch(const GaussianSource& src,
                                 const DitherQuantizer& q, const RngSpec& spec,
                                 std::size_t n, unsigned workers = 1) {
  return encode_batch(source_samples(src, spec, n, workers), q, spec, workers);
}

/// Empirical H(index | dither bin) in bits, the dither being binned into
/// `dither_bins` equal-width (hence equiprobable) cells of [-step/2, step/2].
/// With no dither the plain empirical entropy H(index) is returned.
inline double estimate_rate(std::span<const std::int64_t> index,
                            std::span<const double> dither, double step,
                            int dither_bins = 16) {
  if (index.empty()) throw std::domain_error("estimate_rate: no samples");
  const bool dithered = !dither.empty();
  if (dithered && dither.size() != index.size())
    throw std::domain_error("estimate_rate: length mismatch");
  if (dither_bins < 1) throw std::domain_error("estimate_rate: dither_bins < 1");
  const int bins = dithered ? dither_bins : 1;
  const auto [lo_it, hi_it] = std::minmax_element(index.begin(), index.end());
  const std::int64_t lo = *lo_it;
  const std::size_t range = static_cast<std::size_t>(*hi_it - lo) + 1;
  const std::size_t n = index.size();
  if (n < 10 * static_cast<std::size_t>(bins) * range)
    throw std::domain_error("estimate_rate: need n >= 10 * bins * index range (" +
                            std::to_string(10 * bins * range) + ")");

  std::vector<std::size_t> counts(static_cast<std::size_t>(bins) * range, 0);
  std::vector<std::size_t> per_bin(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int b = 0;
    if (dithered) {
      b = static_cast<int>(std::floor((dither[i] / step + 0.5) * bins));
      b = std::clamp(b, 0, bins - 1);
    }
    ++per_bin[b];
    ++counts[static_cast<std::size_t>(b) * range +
             static_cast<std::size_t>(index[i] - lo)];
  }
  const std::size_t floor_count = 10 * range;
  for (int b = 0; b < bins; ++b)
    if (per_bin[b] < floor_count)
      throw std::domain_error("estimate_rate: dither bin " + std::to_string(b) +
                              " has " + std::to_string(per_bin[b]) +
                              " samples, need " + std::to_string(floor_count));

  double h = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double nb = static_cast<double>(per_bin[b]);
    double hb = 0.0;
    for (std::size_t k = 0; k < range; ++k) {
      const auto c = counts[static_cast<std::size_t>(b) * range + k];
      if (c) {
        const double p = static_cast<double>(c) / nb;
        hb -= p * std::log2(p);
      }
    }
    h += nb / static_cast<double>(n) * hb;
  }
  return h;
}

inline double estimate_rate(const EncodedBatch& b, int dither_bins = 16) {
  return estimate_rate(b.index, b.dither, b.quantizer.step, dither_bins);
}

struct EmpiricalPoint {
  double scale = 0.0;
  double rate_bits = 0.0;
  double distortion = 0.0;
  double perception = 0.0;
  std::size_t n = 0;
};

/// Measures Xhat = scale * (recon - mean) + mean for each scale against the
/// encoder's source sample. The encoder, and hence the rate, is shared.
inline std::vector<EmpiricalPoint> evaluate_decoders(
    const EncodedBatch& b, double mean, std::span<const double> scales,
    int dither_bins = 16) {
  const double rate = estimate_rate(b, dither_bins);
  const std::size_t n = b.x.size();
  std::vector<EmpiricalPoint> out;
  out.reserve(scales.size());
  std::vector<double> xhat(n);
  for (double t : scales) {
    if (!(t >= 0.0)) throw std::domain_error("decoder scales must be >= 0");
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      xhat[i] = t * (b.recon[i] - mean) + mean;
      const double e = b.x[i] - xhat[i];
      mse += e * e;
    }
    out.push_back({t, rate, mse / static_cast<double>(n), empirical_w2(b.x, xhat),
                   n});
  }
  return out;
}

inline std::vector<EmpiricalPoint> decoder_family_sweep(
    const GaussianSource& src, const DitherQuantizer& q,
    std::span<const double> scales, const RngSpec& spec, std::size_t n,
    int dither_bins = 16, unsigned workers = 1) {
  if (n == 0) throw std::domain_error("decoder_family_sweep: n must be > 0");
  const auto b = encode_batch(src, q, spec, n, workers);
  return evaluate_decoders(b, src.mean(), scales, dither_bins);
}

/// Scale of the sample linear MMSE decoder for the batch.
inline double mmse_scale(const EncodedBatch& b, double mean) {
  double sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    const double r = b.recon[i] - mean;
    sxy += (b.x[i] - mean) * r;
    syy += r * r;
  }
  return syy > 0.0 ? sxy / syy : 0.0;
}

/// Scale minimizing the empirical W2 between source and decoder output. For
/// positive scales the quantile coupling pairs sorted x with sorted recon, so
/// the empirical W2 is a quadratic in the scale.
inline double perception_scale(const EncodedBatch& b, double mean) {
  std::vector<double> xs(b.x), rs(b.recon);
  std::sort(xs.begin(), xs.end());
  std::sort(rs.begin(), rs.end());
  double sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = rs[i] - mean;
    sxy += (xs[i] - mean) * r;
    syy += r * r;
  }
  return syy > 0.0 ? sxy / syy : 0.0;
}

/// Decoder family along the distortion-perception boundary of a fixed
/// encoder: evenly spaced scales from the MMSE decoder to the
/// perception-optimal decoder. Along this range perception falls and
/// distortion rises monotonically.
inline std::vector<double> boundary_scales(const EncodedBatch& b, double mean,
                                           int count) {
  if (count < 2) throw std::domain_error("boundary_scales: count < 2");
  const double lo = mmse_scale(b, mean);
  const double hi = perception_scale(b, mean);
  std::vector<double> s(count);
  for (int i = 0; i < count; ++i)
    s[i] = i + 1 == count ? hi : lo + (hi - lo) * i / (count - 1);
  return s;
}

struct QuantizerComparison {
  double mse_dq;
  double mse_uq;
  double mse_nq;
};

/// MSE of DQ, UQ and NQ on one shared source sample.
inline QuantizerComparison quantizer_comparison(const GaussianSource& src,
                                                double step,
                                                const RngSpec& spec,
                                                std::size_t n,
                                                unsigned workers = 1) {
  if (n == 0) throw std::domain_error("quantizer_comparison: n must be > 0");
  const auto x = source_samples(src, spec, n, workers);
  auto mse = [&](QuantizerMode m) {
    const auto b = encode_batch(x, DitherQuantizer(step, m), spec, workers);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = b.recon[i] - b.x[i];
      acc += e * e;
    }
    return acc / static_cast<double>(n);
  };
  return {mse(QuantizerMode::DQ), mse(QuantizerMode::UQ),
          mse(QuantizerMode::NQ)};
}

struct DitherDiagnostics {
  double ks_statistic;  // sup |F_emp - F_uniform| of recon - x
  double correlation;   // sample corr(x, recon - x)
  double mse;
  double expected_mse;  // step^2 / 12
};

inline DitherDiagnostics dither_diagnostics(const EncodedBatch& b) {
  const std::size_t n = b.x.size();
  if (n == 0) throw std::domain_error("dither_diagnostics: empty batch");
  const double step = b.quantizer.step;
  std::vector<double> e(n);
  double mx = 0.0, me = 0.0, mse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = b.recon[i] - b.x[i];
    mx += b.x[i];
    me += e[i];
    mse += e[i] * e[i];
  }
  mx /= static_cast<double>(n);
  me /= static_cast<double>(n);
  double sxe = 0.0, sxx = 0.0, see = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = b.x[i] - mx, de = e[i] - me;
    sxe += dx * de;
    sxx += dx * dx;
    see += de * de;
  }
  std::vector<double> s(e);
  std::sort(s.begin(), s.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::clamp(s[i] / step + 0.5, 0.0, 1.0);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    ks = std::max({ks, std::abs(f - lo), std::abs(hi - f)});
  }
  const double corr = sxx > 0.0 && see > 0.0 ? sxe / std::sqrt(sxx * see) : 0.0;
  return {ks, corr, mse / static_cast<double>(n), step * step / 12.0};
}

// ---------------------------------------------------------------------------
// One-shot channel simulation.

/// Prefix-code length used for the race index k >= 1:
/// ceil(log2 k + 2 log2(log2(k + 1) + 1)) + kZipfLengthConstant. The lengths
/// satisfy Kraft's inequality (sum 2^-len < 0.53).
inline constexpr int kZipfLengthConstant = 0;

inline int zipf_code_length(std::uint64_t k) {
  if (k == 0) throw std::domain_error("zipf_code_length: k must be >= 1");
  const double kd = static_cast<double>(k);
  const double len = std::log2(kd) + 2.0 * std::log2(std::log2(kd + 1.0) + 1.0);
  return static_cast<int>(std::ceil(len - 1e-12)) + kZipfLengthConstant;
}

inline constexpr std::uint64_t kMaxProposals = 1'000'000;

namespace detail {

inline std::size_t sample_index(std::span<const double> cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                               cdf.size() - 1);
}

inline std::vector<double> cumulative(std::span<const double> p) {
  std::vector<double> c(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = acc += p[i];
  return c;
}

}  // namespace detail

struct RaceOutcome {
  std::uint64_t index;  // 1-based winning proposal
  std::size_t output;   // symbol carried by the winner
};

/// Encoder side of the Poisson functional representation for one trial:
/// proposals Y_i ~ q with arrival times T_i (unit-rate Poisson process) come
/// from the shared stream; the winner minimizes T_i q(Y_i) / W(Y_i | x).
inline RaceOutcome pfr_encode(std::span<const double> row,
                              std::span<const double> marginal,
                              const RngSpec& spec, std::uint64_t trial) {
  double max_ratio = 0.0;
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (row[y] > 0.0) {
      if (!(marginal[y] > 0.0))
        throw std::domain_error(
            "pfr: channel row not absolutely continuous w.r.t. marginal");
      max_ratio = std::max(max_ratio, row[y] / marginal[y]);
    }
  }
  if (max_ratio == 0.0) throw std::domain_error("pfr: empty channel row");
  const auto cdf = detail::cumulative(marginal);
  Rng shared(spec, StreamTag::Proposals, trial);
  double t = 0.0;
  double best = std::numeric_limits<double>::infinity();
  RaceOutcome win{0, 0};
  for (std::uint64_t i = 1; i <= kMaxProposals; ++i) {
    t += shared.exponential();
    if (t / max_ratio >= best) return win;
    const std::size_t y = detail::sample_index(cdf, shared.uniform());
    if (row[y] > 0.0) {
      const double score = t * marginal[y] / row[y];
      if (score < best) {
        best = score;
        win = {i, y};
      }
    }
  }
  throw NumericalError("pfr: proposal stream exhausted");
}

/// Decoder side: regenerates proposal `index` from the shared stream.
inline std::size_t pfr_decode(std::span<const double> marginal,
                              const RngSpec& spec, std::uint64_t trial,
                              std::uint64_t index) {
  const auto cdf = detail::cumulative(marginal);
  Rng shared(spec, StreamTag::Proposals, trial);
  std::size_t y = 0;
  for (std::uint64_t i = 1; i <= index; ++i) {
    (void)shared.exponential();
    y = detail::sample_index(cdf, shared.uniform());
  }
  return y;
}

struct PfrResult {
  double mean_codelength_bits = 0.0;
  double conditional_law_error = 0.0;  // max_x chi-square distance
  double chi_square = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  double mutual_information_bits = 0.0;
  double mean_log2_index = 0.0;
  std::uint64_t max_index = 0;
  std::size_t trials = 0;
};

inline PfrResult pfr_channel_simulation(const ChannelMatrix& channel,
                                        std::span<const double> input_pmf,
                                        const RngSpec& spec,
                                        std::size_t trials) {
  if (trials == 0) throw std::domain_error("pfr: trials must be > 0");
  check_pmf(input_pmf, "pfr input pmf");
  const auto q = output_marginal(input_pmf, channel);
  const auto in_cdf = detail::cumulative(input_pmf);
  const std::size_t m = channel.inputs(), k = channel.outputs();
  std::vector<std::size_t> counts(m * k, 0), per_input(m, 0);

  PfrResult r;
  r.trials = trials;
  r.mutual_information_bits = mutual_information_bits(input_pmf, channel);
  double len_sum = 0.0, log_sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng inputs(spec, StreamTag::Inputs, t);
    const std::size_t x = detail::sample_index(in_cdf, inputs.uniform());
    const auto win = pfr_encode(channel.row(x), q, spec, t);
    const std::size_t y = pfr_decode(q, spec, t, win.index);
    ++counts[x * k + y];
    ++per_input[x];
    len_sum += zipf_code_length(win.index);
    log_sum += std::log2(static_cast<double>(win.index));
    r.max_index = std::max(r.max_index, win.index);
  }
  r.mean_codelength_bits = len_sum / static_cast<double>(trials);
  r.mean_log2_index = log_sum / static_cast<double>(trials);

  for (std::size_t x = 0; x < m; ++x) {
    if (per_input[x] == 0) continue;
    const double nx = static_cast<double>(per_input[x]);
    double dist = 0.0;
    int support = 0;
    for (std::size_t y = 0; y < k; ++y) {
      const double p = channel(x, y);
      if (p <= 0.0) continue;
      ++support;
      const double obs = static_cast<double>(counts[x * k + y]);
      const double exp = nx * p;
      r.chi_square += (obs - exp) * (obs - exp) / exp;
      const double ph = obs / nx;
      dist += (ph - p) * (ph - p) / p;
    }
    r.degrees_of_freedom += support - 1;
    r.conditional_law_error = std::max(r.conditional_law_error, dist);
  }
  r.p_value = r.degrees_of_freedom > 0
                  ? boost::math::gamma_q(0.5 * r.degrees_of_freedom,
                                         0.5 * r.chi_square)
                  : 1.0;
  return r;
}

}  // namespace rdplab
