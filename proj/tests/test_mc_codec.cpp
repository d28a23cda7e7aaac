// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rdplab/discrete_rdp.hpp"
#include "rdplab/mc_codec.hpp"
#include "rdplab/one_shot.hpp"
#include "rdplab/rdp_core.hpp"
#include "rdplab/wasserstein.hpp"

using namespace rdplab;

namespace {

const GaussianSource kUnit(0.0, 1.0);
const RngSpec kSpec{42, 0};

}  // namespace

TEST(UqRoundtrip, Examples) {
  const DitherQuantizer q(0.5, QuantizerMode::UQ);
  const auto a = uq_roundtrip(0.3, 0.1, q);
  EXPECT_EQ(a.index, 1);
  EXPECT_DOUBLE_EQ(a.index * q.step, 0.5);
  EXPECT_DOUBLE_EQ(a.reconstruction, 0.4);

  const auto tie = uq_roundtrip(0.25, 0.0, q);
  EXPECT_EQ(tie.index, 1);
  EXPECT_DOUBLE_EQ(tie.reconstruction, 0.5);
  EXPECT_EQ(uq_roundtrip(-0.25, 0.0, q).index, -1);

  for (double step : {1e-2, 1e-4, 1e-6})
    EXPECT_NEAR(uq_roundtrip(0.123456789, 0.0, DitherQuantizer(step, QuantizerMode::UQ))
                    .reconstruction,
                0.123456789, step / 2 + 1e-15);
}

TEST(UqRoundtrip, Errors) {
  const DitherQuantizer q(0.5, QuantizerMode::UQ);
  EXPECT_THROW(uq_roundtrip(std::nan(""), 0.0, q), std::domain_error);
  EXPECT_THROW(uq_roundtrip(INFINITY, 0.0, q), std::domain_error);
  EXPECT_THROW(uq_roundtrip(0.0, 0.3, q), std::domain_error);
  EXPECT_THROW(DitherQuantizer(0.0, QuantizerMode::DQ), std::domain_error);
}

TEST(EstimateRate, ConstantSourceIsFree) {
  const auto b = encode_batch(GaussianSource::degenerate(0.0),
                              DitherQuantizer(0.5, QuantizerMode::DQ), kSpec, 10000);
  EXPECT_EQ(estimate_rate(b), 0.0);
  const auto coarse = encode_batch(kUnit, DitherQuantizer(1000.0, QuantizerMode::DQ), kSpec, 10000);
  EXPECT_EQ(estimate_rate(coarse), 0.0);
  // Without the shared offset a few samples still straddle a cell edge.
  const auto uq = encode_batch(kUnit, DitherQuantizer(1000.0, QuantizerMode::UQ), kSpec, 10000);
  EXPECT_LT(estimate_rate(uq), 0.01);
}

TEST(EstimateRate, MatchesDitheredEntropyQuadrature) {
  const auto b = encode_batch(kUnit, DitherQuantizer(0.5, QuantizerMode::UQ), kSpec, 1'000'000);
  const double want = oracle::dithered_entropy_bits(1.0, 0.5);
  EXPECT_NEAR(want, 3.06, 0.01);
  EXPECT_NEAR(estimate_rate(b), want, 0.02);
}

TEST(EstimateRate, InsufficientSamplesNameTheBin) {
  const auto b = encode_batch(kUnit, DitherQuantizer(0.5, QuantizerMode::UQ), kSpec, 500);
  try {
    (void)estimate_rate(b);
    FAIL() << "expected an error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("bin"), std::string::npos) << e.what();
  }
}

TEST(EmpiricalW2, Examples) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> a(1000);
  for (auto& v : a) v = g(gen);
  EXPECT_EQ(empirical_w2(a, a), 0.0);
  std::vector<double> b(a);
  for (auto& v : b) v += 0.7;
  EXPECT_NEAR(empirical_w2(a, b), 0.49, 1e-12);
  EXPECT_THROW(empirical_w2(a, std::vector<double>{}), std::domain_error);
}

TEST(EmpiricalW2, GaussianScaleChange) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> g1(0.0, 1.0), g2(0.0, 2.0);
  std::vector<double> a(1'000'000), b(999'000);
  for (auto& v : a) v = g1(gen);
  for (auto& v : b) v = g2(gen);
  EXPECT_NEAR(empirical_w2(a, b), 1.0, 0.01);
}

TEST(DecoderFamilySweep, Examples) {
  const DitherQuantizer q(0.5, QuantizerMode::UQ);
  const auto b = encode_batch(kUnit, q, kSpec, 200000);
  const std::vector<double> zero{0.0};
  const auto flat = evaluate_decoders(b, 0.0, zero);
  EXPECT_NEAR(flat[0].distortion, 1.0, 0.01);
  EXPECT_NEAR(flat[0].perception, 1.0, 0.01);

  // Closed-form linear MMSE over the measured second moments.
  double sxr = 0, srr = 0;
  for (std::size_t i = 0; i < b.x.size(); ++i) sxr += b.x[i] * b.recon[i], srr += b.recon[i] * b.recon[i];
  const double t_star = sxr / srr;
  EXPECT_NEAR(mmse_scale(b, 0.0), t_star, 1e-12);
  std::vector<double> scales;
  for (int i = -10; i <= 10; ++i) scales.push_back(t_star + 0.01 * i);
  const auto pts = evaluate_decoders(b, 0.0, scales);
  const auto best = std::min_element(pts.begin(), pts.end(), [](const auto& l, const auto& r) {
    return l.distortion < r.distortion;
  });
  EXPECT_EQ(best - pts.begin(), 10);
}

TEST(DecoderFamilySweep, AboveInformationBoundAndFixedRate) {
  const DitherQuantizer q(0.5, QuantizerMode::UQ);
  const auto b = encode_batch(kUnit, q, kSpec, 200000);
  const auto scales = boundary_scales(b, 0.0, 20);
  const auto pts = evaluate_decoders(b, 0.0, scales);
  ASSERT_EQ(pts.size(), 20u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(pts[i].rate_bits, pts[0].rate_bits);
    EXPECT_GE(pts[i].distortion,
              distortion_rate_perception(kUnit, Rate(pts[i].rate_bits), pts[i].perception) - 0.01);
    if (i) {
      EXPECT_LT(pts[i].perception, pts[i - 1].perception);
      EXPECT_GT(pts[i].distortion, pts[i - 1].distortion);
    }
  }
  EXPECT_LT(pts.back().perception, 0.005);
  EXPECT_THROW(decoder_family_sweep(kUnit, q, scales, kSpec, 0), std::domain_error);
}

TEST(QuantizerComparison, Examples) {
  const auto point = quantizer_comparison(GaussianSource::degenerate(0.0), 0.5, kSpec, 100000);
  EXPECT_EQ(point.mse_dq, 0.0);
  EXPECT_NEAR(point.mse_uq, 0.25 / 12, 0.05 * 0.25 / 12);

  const auto fine = quantizer_comparison(kUnit, 1e-4, kSpec, 10000);
  EXPECT_LT(std::max({fine.mse_dq, fine.mse_uq, fine.mse_nq}), 1e-8);

  const auto c = quantizer_comparison(kUnit, 0.5, kSpec, 1'000'000);
  const double base = 0.25 / 12;
  EXPECT_NEAR(c.mse_uq, base, 0.05 * base);
  EXPECT_NEAR(c.mse_nq, 2 * base, 0.10 * 2 * base);
  EXPECT_LE(c.mse_dq, c.mse_uq * 1.01);
  EXPECT_LT(c.mse_uq, c.mse_nq);
}

TEST(DitherLaw, UniformAndUncorrelated) {
  const auto b = encode_batch(kUnit, DitherQuantizer(0.5, QuantizerMode::UQ), kSpec, 100000);
  const auto d = dither_diagnostics(b);
  EXPECT_LT(d.ks_statistic, 0.01);
  EXPECT_LT(std::abs(d.correlation), 0.01);
  EXPECT_NEAR(d.mse, 0.25 / 12, 0.05 * 0.25 / 12);
  for (std::size_t i = 0; i < b.x.size(); ++i)
    ASSERT_LE(std::abs(b.recon[i] - b.x[i]), 0.25 + 1e-12);
}

TEST(SharedRandomness, DecoderRegeneratesTheDither) {
  const auto b = encode_batch(kUnit, DitherQuantizer(0.5, QuantizerMode::UQ), kSpec, 50000);
  const auto u = shared_dither(kSpec, 50000, 0.5);
  ASSERT_EQ(u, b.dither);
  for (std::size_t i = 0; i < u.size(); ++i)
    ASSERT_EQ(b.index[i] * 0.5 - u[i], b.recon[i]);
}

TEST(SharedRandomness, Determinism) {
  const DitherQuantizer q(0.5, QuantizerMode::UQ);
  const std::vector<double> scales{0.2, 0.8, 1.0};
  const auto a = decoder_family_sweep(kUnit, q, scales, kSpec, 60000);
  const auto b = decoder_family_sweep(kUnit, q, scales, kSpec, 60000);
  const auto c = decoder_family_sweep(kUnit, q, scales, kSpec, 60000, 16, 3);
  const auto other = decoder_family_sweep(kUnit, q, scales, RngSpec{42, 1}, 60000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].distortion, b[i].distortion);
    EXPECT_EQ(a[i].perception, b[i].perception);
    EXPECT_EQ(a[i].rate_bits, b[i].rate_bits);
    EXPECT_EQ(a[i].distortion, c[i].distortion);
    EXPECT_NE(a[i].distortion, other[i].distortion);
  }
}

TEST(ZipfCode, KraftSumBelowOne) {
  double kraft = 0.0;
  for (std::uint64_t k = 1; k <= 2'000'000; ++k) kraft += std::exp2(-zipf_code_length(k));
  EXPECT_LT(kraft, 1.0);
  EXPECT_EQ(zipf_code_length(1), 2);
  EXPECT_THROW(zipf_code_length(0), std::domain_error);
}

TEST(Pfr, ZeroInformationChannel) {
  const auto ch = ChannelMatrix::from_rows({{0.3, 0.7}, {0.3, 0.7}});
  const std::vector<double> pin{0.5, 0.5};
  const auto r = pfr_channel_simulation(ch, pin, kSpec, 2000);
  EXPECT_EQ(r.max_index, 1u);
  EXPECT_LE(r.mean_codelength_bits, 5.0);
  EXPECT_NEAR(r.mutual_information_bits, 0.0, 1e-15);
}

TEST(Pfr, DeterministicInputLawConverges) {
  const auto ch = ChannelMatrix::from_rows({{0.2, 0.5, 0.3}, {0.6, 0.2, 0.2}});
  const std::vector<double> pin{1.0, 0.0};
  const auto small = pfr_channel_simulation(ch, pin, kSpec, 500);
  const auto big = pfr_channel_simulation(ch, pin, kSpec, 50000);
  EXPECT_LT(big.conditional_law_error, small.conditional_law_error);
  EXPECT_LT(big.conditional_law_error, 1e-3);
}

TEST(Pfr, BinarySymmetricChannel) {
  const auto ch = ChannelMatrix::from_rows({{0.89, 0.11}, {0.11, 0.89}});
  const std::vector<double> pin{0.5, 0.5};
  const auto r = pfr_channel_simulation(ch, pin, kSpec, 10000);
  const double info = evaluate(DiscreteModel::hamming(pin), ch, {}).rate.bits();
  EXPECT_NEAR(r.mutual_information_bits, info, 1e-12);
  EXPECT_NEAR(info, 0.50008, 1e-4);
  EXPECT_LE(r.mean_codelength_bits, sandwich(Rate(info)).upper.bits());
  EXPECT_GT(r.p_value, 0.01);
  EXPECT_EQ(r.degrees_of_freedom, 2);
}

TEST(Pfr, EncoderAndDecoderAgree) {
  const std::vector<double> q{0.25, 0.25, 0.5};
  const std::vector<double> row{0.0, 0.6, 0.4};
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto w = pfr_encode(row, q, kSpec, t);
    EXPECT_EQ(pfr_decode(q, kSpec, t, w.index), w.output);
    EXPECT_NE(w.output, 0u);
  }
  const std::vector<double> bad_q{0.0, 0.5, 0.5};
  const std::vector<double> bad_row{1.0, 0.0, 0.0};
  EXPECT_THROW(pfr_encode(bad_row, bad_q, kSpec, 0), std::domain_error);
}
