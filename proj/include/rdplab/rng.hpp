// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Reproducible random streams. A stream is identified by (seed, stream,
// substream); identical identifiers yield bit-identical sequences on every
// platform, since only the fully specified mt19937_64 engine and
// hand-written variate transforms are used.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rdplab {

struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Stream tags keep the source, shared dither and decoder-private noise of one
/// RngSpec independent of each other.
enum class StreamTag : std::uint64_t {
  Source = 1,
  SharedDither = 2,
  DecoderNoise = 3,
  Proposals = 4,
  Inputs = 5,
};

class Rng {
 public:
  Rng(const RngSpec& spec, StreamTag tag, std::uint64_t substream = 0)
      : engine_(derive(spec, tag, substream)) {}

  static std::uint64_t derive(const RngSpec& spec, StreamTag tag,
                              std::uint64_t substream) {
    std::uint64_t h = detail::splitmix64(spec.seed);
    h = detail::splitmix64(h ^ spec.stream);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(tag));
    return detail::splitmix64(h ^ substream);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_low() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double k = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * k;
    has_spare_ = true;
    return u * k;
  }

  double exponential() { return -std::log(uniform_open_low()); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rdplab
