// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// Subcommand implementations for the rdplab command-line tool. Each command
// takes a fully resolved JSON configuration and writes CSV/JSON artifacts
// into an output directory.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdplab/rdplab.hpp"

namespace rdplab::cli {

using io::json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 2, kInfeasible = 3, kNumerical = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeed = 1;

inline json default_config(const std::string& cmd) {
  const json source = {{"mean", 0.0}, {"variance", 1.0}};
  if (cmd == "curve")
    return {{"source", source},
            {"rates", {0.1, 0.2, 0.4, 1.0}},
            {"knots", 33},
            {"surface", {{"distortion_points", 20}, {"perception_points", 20}}}};
  if (cmd == "region")
    return {{"source", source},
            {"rate", 1.0},
            {"knots", 33},
            {"representations",
             {{{"name", "min_distortion"}, {"perception_fraction", 1.0}},
              {{"name", "midpoint"}, {"perception_fraction", 0.5}},
              {{"name", "perfect_perception"}, {"perception_fraction", 0.0}}}},
            {"gap_points", 9}};
  if (cmd == "simulate")
    return {{"source", source},
            {"step", 0.5},
            {"mode", "UQ"},
            {"n", 200000},
            {"scales", "boundary"},
            {"scale_count", 20},
            {"dither_bins", 16},
            {"workers", 1},
            {"stream", 0}};
  if (cmd == "discrete")
    return {{"model", {{"source_pmf", {0.5, 0.5}}, {"distortion", "hamming"},
                       {"perception", "total_variation"}}},
            {"constraints", {{{"distortion", 0.11}, {"perception", 0.0}}}},
            {"tolerance", 1e-6},
            {"max_iters", 5000}};
  if (cmd == "refine")
    return {{"source", source}, {"r1", 0.5}, {"r2", 1.0}, {"knots", 17},
            {"dimension", 1}};
  throw UsageError("unknown command: " + cmd);
}

/// RDPLAB_SEED if set and well formed.
inline std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("RDPLAB_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("RDPLAB_SEED is not an unsigned integer: ") + s);
  }
}

/// Defaults, then the config file, then flags. The seed comes from the flag,
/// else the config file, else RDPLAB_SEED, else the built-in default.
inline json resolve_config(const std::string& cmd, const json& file_cfg,
                           const json& flags) {
  json cfg = default_config(cmd);
  if (!file_cfg.is_null()) {
    if (!file_cfg.is_object()) throw UsageError("config file must hold a JSON object");
    cfg.merge_patch(file_cfg);
  }
  if (!flags.is_null()) cfg.merge_patch(flags);
  if (!cfg.contains("seed") || cfg["seed"].is_null()) {
    const auto e = env_seed();
    cfg["seed"] = e ? *e : kDefaultSeed;
  }
  if (!cfg["seed"].is_number_unsigned() && !cfg["seed"].is_number_integer())
    throw UsageError("seed must be an unsigned integer");
  cfg["command"] = cmd;
  return cfg;
}

namespace detail {

inline GaussianSource source_of(const json& cfg) {
  const auto& s = cfg.at("source");
  return GaussianSource(s.value("mean", 0.0), s.value("variance", 1.0));
}

inline Rate rate_of(const json& j) {
  if (j.is_string() && (j.get<std::string>() == "inf")) return Rate::infinite();
  if (!j.is_number()) throw UsageError("rate must be a number or \"inf\"");
  return Rate(j.get<double>());
}

inline int positive_int(const json& cfg, const char* key) {
  const int v = cfg.at(key).get<int>();
  if (v < 1) throw UsageError(std::string(key) + " must be >= 1");
  return v;
}

/// Writes a file and reports it on the log stream.
inline void emit(const fs::path& out, const std::string& name,
                 const std::string& text, std::ostream& log) {
  io::write_text(out / name, text);
  log << (out / name).string() << "\n";
}

inline void emit_json(const fs::path& out, const std::string& name,
                      const json& cfg, const json& results, std::ostream& log) {
  emit(out, name, json{{"config", cfg}, {"results", results}}.dump(2) + "\n", log);
}

}  // namespace detail

inline int cmd_curve(const json& cfg, const fs::path& out, std::ostream& log) {
  const auto src = detail::source_of(cfg);
  const auto& rates = cfg.at("rates");
  if (!rates.is_array() || rates.empty()) throw UsageError("curve: rate list is empty");
  const int knots = detail::positive_int(cfg, "knots");
  json index = json::array();
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const Rate r = detail::rate_of(rates[i]);
    const auto b = omega_boundary(src, r, knots);
    const std::string name = "boundary_" + std::to_string(i) + ".csv";
    detail::emit(out, name, io::to_csv(io::boundary_table(b), cfg), log);
    index.push_back({{"file", name}, {"rate_bits", r.bits()}});
  }
  const auto& surf = cfg.at("surface");
  const int nd = surf.at("distortion_points").get<int>();
  const int np = surf.at("perception_points").get<int>();
  if (nd < 1 || np < 2) throw UsageError("curve: surface grid too small");
  io::CsvTable t{{"distortion", "perception", "rate_bits"}, {}};
  const double var = src.variance();
  for (int i = 1; i <= nd; ++i)
    for (int j = 0; j < np; ++j) {
      const double d = 2.0 * var * i / nd;
      const double p = var * j / (np - 1);
      t.add({d, p, rate_distortion_perception(src, {d, p}).bits()});
    }
  detail::emit(out, "surface.csv", io::to_csv(t, cfg), log);
  detail::emit_json(out, "curve.json", cfg, {{"boundaries", index}}, log);
  return kOk;
}

inline int cmd_region(const json& cfg, const fs::path& out, std::ostream& log) {
  const auto src = detail::source_of(cfg);
  const Rate rate = detail::rate_of(cfg.at("rate"));
  const int knots = detail::positive_int(cfg, "knots");
  const double threshold = perception_threshold(src, rate);
  const double rho = std::sqrt(numeric::one_minus_exp2_neg2(rate.bits()));

  io::CsvTable ext{{"name", "mmse_distortion", "upper_left_distortion",
                    "upper_left_perception", "lower_right_distortion",
                    "omega_distortion_at_zero"},
                   {}};
  json summary = json::array();
  for (const auto& r : cfg.at("representations")) {
    const std::string name = r.at("name").get<std::string>();
    RepresentationSummary s;
    if (r.contains("canonical_rate")) {
      s = summarize(canonical_representation(src, detail::rate_of(r["canonical_rate"])));
    } else if (r.contains("perception_fraction")) {
      // Optimal reconstruction for (D(P, R), P) at the region rate, used as
      // the representation itself.
      const double f = r["perception_fraction"].get<double>();
      if (f < 0.0 || f > 1.0) throw UsageError("perception_fraction must lie in [0, 1]");
      const double sd = src.stddev() - std::sqrt(f * threshold);
      s = summarize(GaussianRepresentation(src, src.mean(), sd * sd,
                                           rho * src.stddev() * sd));
    } else if (r.contains("mmse_distortion") && r.contains("mmse_std")) {
      s = {r["mmse_distortion"].get<double>(), r["mmse_std"].get<double>(), true};
    } else {
      throw UsageError("representation '" + name +
                       "' needs canonical_rate, perception_fraction or mmse fields");
    }
    const auto b = achievable_boundary(src, s, knots, rate);
    detail::emit(out, "region_" + name + ".csv", io::to_csv(io::boundary_table(b), cfg), log);
    const auto e = extreme_points(src, s);
    ext.add({name, s.mmse_distortion, e.upper_left.distortion, e.upper_left.perception,
             e.lower_right.distortion, distortion_rate_perception(src, rate, 0.0)});
    summary.push_back({{"name", name},
                       {"mmse_distortion", s.mmse_distortion},
                       {"mmse_std", s.mmse_std},
                       {"boundary", io::boundary_to_json(b)}});
  }
  detail::emit(out, "extreme_points.csv", io::to_csv(ext, cfg), log);

  const int gp = detail::positive_int(cfg, "gap_points");
  io::CsvTable gaps{{"d1", "d3_lower", "additive_bound", "multiplicative_bound",
                     "tilde_additive", "tilde_multiplicative"},
                    {}};
  for (int i = 1; i <= gp; ++i) {
    const double d1 = src.variance() * i / (gp + 1);
    const auto g = gap_bounds(src, d1);
    gaps.add({d1, g.d3_lower, g.additive_bound, g.multiplicative_bound,
              g.tilde_additive, g.tilde_multiplicative});
  }
  detail::emit(out, "gap_bounds.csv", io::to_csv(gaps, cfg), log);
  detail::emit_json(out, "region.json", cfg,
                    {{"boundary_model", "gaussian_summary: the conditional mean enters "
                                        "through its first two moments"},
                     {"representations", summary}},
                    log);
  return kOk;
}

inline QuantizerMode mode_of(const std::string& s) {
  if (s == "UQ") return QuantizerMode::UQ;
  if (s == "DQ") return QuantizerMode::DQ;
  if (s == "NQ") return QuantizerMode::NQ;
  throw UsageError("mode must be UQ, DQ or NQ");
}

inline int cmd_simulate(const json& cfg, const fs::path& out, std::ostream& log) {
  const auto src = detail::source_of(cfg);
  const double step = cfg.at("step").get<double>();
  const auto n_signed = cfg.at("n").get<long long>();
  if (n_signed <= 0) throw UsageError("simulate: n must be positive");
  const auto n = static_cast<std::size_t>(n_signed);
  const int workers = cfg.at("workers").get<int>();
  if (workers < 1) throw UsageError("simulate: workers must be >= 1");
  const int bins = detail::positive_int(cfg, "dither_bins");
  const RngSpec spec{cfg.at("seed").get<std::uint64_t>(), cfg.at("stream").get<std::uint64_t>()};
  const DitherQuantizer q(step, mode_of(cfg.at("mode").get<std::string>()));

  const auto batch = encode_batch(src, q, spec, n, static_cast<unsigned>(workers));
  std::vector<double> scales;
  const auto& sc = cfg.at("scales");
  if (sc.is_string()) {
    if (sc.get<std::string>() != "boundary")
      throw UsageError("scales must be a list or \"boundary\"");
    scales = boundary_scales(batch, src.mean(), detail::positive_int(cfg, "scale_count"));
  } else {
    scales = sc.get<std::vector<double>>();
    if (scales.empty()) throw UsageError("simulate: empty scale list");
  }
  const auto pts = evaluate_decoders(batch, src.mean(), scales, bins);
  detail::emit(out, "sweep.csv", io::to_csv(io::sweep_table(pts), cfg), log);

  json bound = json::array();
  for (const auto& p : pts)
    bound.push_back(distortion_rate_perception(src, Rate(p.rate_bits), p.perception));

  const auto cmp = quantizer_comparison(src, step, spec, n, static_cast<unsigned>(workers));
  io::CsvTable qt{{"mode", "mse"}, {}};
  qt.add({std::string("DQ"), cmp.mse_dq});
  qt.add({std::string("UQ"), cmp.mse_uq});
  qt.add({std::string("NQ"), cmp.mse_nq});
  detail::emit(out, "quantizers.csv", io::to_csv(qt, cfg), log);

  json diag = nullptr;
  if (q.mode == QuantizerMode::UQ) {
    const auto d = dither_diagnostics(batch);
    io::CsvTable dt{{"ks_statistic", "correlation", "mse", "expected_mse"}, {}};
    dt.add({d.ks_statistic, d.correlation, d.mse, d.expected_mse});
    detail::emit(out, "dither.csv", io::to_csv(dt, cfg), log);
    diag = {{"ks_statistic", d.ks_statistic}, {"correlation", d.correlation},
            {"mse", d.mse}, {"expected_mse", d.expected_mse}};
  }
  detail::emit_json(
      out, "sweep.json", cfg,
      {{"points", io::sweep_to_json(pts)},
       {"information_bound_distortion", bound},
       {"rate_estimator", "conditional empirical entropy H(index | dither bin), " +
                              std::to_string(bins) + " equiprobable dither bins"},
       {"quantizer_mse", {{"DQ", cmp.mse_dq}, {"UQ", cmp.mse_uq}, {"NQ", cmp.mse_nq}}},
       {"dither", diag}},
      log);
  return kOk;
}

inline int cmd_discrete(const json& cfg, const fs::path& out, std::ostream& log) {
  const auto model = io::model_from_json(cfg.at("model"));
  SolveOptions opts;
  opts.tolerance = cfg.at("tolerance").get<double>();
  opts.max_iters = cfg.at("max_iters").get<int>();
  opts.seed = cfg.at("seed").get<std::uint64_t>();
  const auto& cs = cfg.at("constraints");
  if (!cs.is_array() || cs.empty()) throw UsageError("discrete: constraint list is empty");

  io::CsvTable t{{"distortion_bound", "perception_bound", "status", "rate_bits",
                  "achieved_distortion", "achieved_perception", "sandwich_upper"},
                 {}};
  json results = json::array();
  bool any_infeasible = false;
  for (const auto& cj : cs) {
    const ConstraintPair c{io::bound_from_json(cj.value("distortion", json(nullptr))),
                           io::bound_from_json(cj.value("perception", json(nullptr)))};
    const auto r = solve(model, c, opts);
    json entry = {{"constraint", {{"distortion", io::bound_to_json(c.distortion)},
                                  {"perception", io::bound_to_json(c.perception)}}},
                  {"result", io::solve_result_to_json(r)}};
    const auto bd = c.distortion.is_finite() ? io::Cell{c.distortion.value()}
                                             : io::Cell{std::string("unconstrained")};
    const auto bp = c.perception.is_finite() ? io::Cell{c.perception.value()}
                                             : io::Cell{std::string("unconstrained")};
    if (r.status == SolveStatus::Infeasible) {
      any_infeasible = true;
      t.add({bd, bp, std::string("infeasible"), std::string("inf"), std::string(""),
             std::string(""), std::string("")});
    } else {
      const auto s = sandwich(r.rate);
      entry["sandwich"] = {{"lower", io::rate_to_json(s.lower)},
                           {"upper", io::rate_to_json(s.upper)}};
      t.add({bd, bp, std::string("solved"), r.rate.bits(), r.distortion, r.perception,
             s.upper.bits()});
    }
    results.push_back(entry);
  }
  detail::emit(out, "discrete.csv", io::to_csv(t, cfg), log);
  detail::emit_json(out, "discrete.json", cfg,
                    {{"model", io::model_to_json(model)}, {"solutions", results}}, log);
  return any_infeasible ? kInfeasible : kOk;
}

inline int cmd_refine(const json& cfg, const fs::path& out, std::ostream& log) {
  const auto src = detail::source_of(cfg);
  const Rate r1 = detail::rate_of(cfg.at("r1"));
  const Rate r2 = detail::rate_of(cfg.at("r2"));
  if (r1 > r2) throw UsageError("refine: r1 must not exceed r2");
  if (!r2.is_finite()) throw UsageError("refine: rates must be finite");
  const int knots = detail::positive_int(cfg, "knots");
  const int dim = detail::positive_int(cfg, "dimension");

  const auto plan = gaussian_two_stage(src, r1, r2);
  const auto info = stage_information(src, plan);
  const auto z1 = stage_one(src, plan);
  const auto z2 = stage_two(src, plan);
  auto covers_boundary = [&](const GaussianRepresentation& rep, Rate r) {
    for (const auto& k : omega_boundary(src, r, knots).knots)
      if (!covers(rep, {k.distortion, k.perception}, 1e-9)) return false;
    return true;
  };
  const auto corners = region_corners(r1, r2);

  const double d1 = src.variance() * std::exp2(-2.0 * r1.bits());
  const double d2 = src.variance() * std::exp2(-2.0 * r2.bits());
  json delta = nullptr;
  if (d2 > 0.0 && d1 > 0.0) {
    const auto inf = delta_r_infimum(src.variance(), dim, r1, d1, d2);
    delta = {{"d1", d1}, {"d2", d2}, {"dimension", dim},
             {"canonical", delta_r_canonical(src.variance(), dim, r1, d1, d2)},
             {"infimum", inf.delta}, {"infimum_noise_variance", inf.noise_var}};
  }

  io::CsvTable t{{"kind", "r1", "r2"}, {}};
  t.add({std::string("outer"), corners.outer.r1.bits(), corners.outer.r2.bits()});
  t.add({std::string("inner_with_overhead"), corners.inner.r1.bits(), corners.inner.r2.bits()});
  detail::emit(out, "corners.csv", io::to_csv(t, cfg), log);
  detail::emit_json(
      out, "refine.json", cfg,
      {{"plan", {{"z1_variance", plan.z1_variance},
                 {"n1_variance", plan.n1_variance},
                 {"n2_variance", plan.n2_variance}}},
       {"information", {{"i_x_z1", info.i_x_z1},
                        {"i_x_z2", info.i_x_z2},
                        {"i_x_z1z2", info.i_x_z1z2},
                        {"i_x_z2_given_z1", info.i_x_z2_g_z1}}},
       {"stage_one_covers_omega", covers_boundary(z1, r1)},
       {"stage_two_covers_omega", covers_boundary(z2, r2)},
       {"delta_r", delta}},
      log);
  return kOk;
}

inline int run_command(const std::string& cmd, const json& cfg, const fs::path& out,
                       std::ostream& log) {
  if (cmd == "curve") return cmd_curve(cfg, out, log);
  if (cmd == "region") return cmd_region(cfg, out, log);
  if (cmd == "simulate") return cmd_simulate(cfg, out, log);
  if (cmd == "discrete") return cmd_discrete(cfg, out, log);
  if (cmd == "refine") return cmd_refine(cfg, out, log);
  throw UsageError("unknown command: " + cmd);
}

}  // namespace rdplab::cli
