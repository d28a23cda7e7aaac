// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using rdplab::cli::json;

struct Common {
  std::string config;
  std::string out = "rdplab_out";
  std::optional<std::uint64_t> seed;
};

json read_config(const std::string& path) {
  if (path.empty()) return nullptr;
  std::ifstream f(path);
  if (!f) throw rdplab::cli::UsageError("cannot read config file " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw rdplab::cli::UsageError("config file " + path + ": " + e.what());
  }
}

/// Numeric list flag. Empty entries are dropped, so `--rates ""` is an
/// explicit empty list.
json number_list(const std::vector<std::string>& items, const char* flag) {
  json out = json::array();
  for (const auto& s : items) {
    if (s.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size())
      throw rdplab::cli::UsageError(std::string(flag) + ": not a number: " + s);
    out.push_back(v);
  }
  return out;
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdplab: rate-distortion-perception computations and simulations"};
  app.require_subcommand(1);

  Common common;
  json flags = json::object();
  std::optional<double> mean, variance, rate, step, tolerance, r1, r2;
  std::optional<std::string> distortion, perception, mode, model_file;
  std::optional<long long> n;
  std::optional<int> knots, workers, scale_count, bins, max_iters, dimension;
  std::optional<std::uint64_t> stream;
  std::vector<std::string> rates, scales;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file");
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--seed", common.seed, "RNG seed (overrides config and RDPLAB_SEED)");
  };
  auto add_source = [&](CLI::App* sub) {
    sub->add_option("--mean", mean, "source mean");
    sub->add_option("--variance", variance, "source variance");
  };

  auto* curve = app.add_subcommand("curve", "distortion-perception boundaries and R(D,P) surface");
  add_common(curve);
  add_source(curve);
  auto* rates_opt = curve->add_option("--rates", rates, "rates in bits")->delimiter(',');
  curve->add_option("--knots", knots, "knots per boundary");

  auto* region = app.add_subcommand("region", "achievable regions of fixed representations");
  add_common(region);
  add_source(region);
  region->add_option("--rate", rate, "rate in bits");
  region->add_option("--knots", knots, "knots per boundary");

  auto* sim = app.add_subcommand("simulate", "dithered quantizer and decoder-family sweep");
  add_common(sim);
  add_source(sim);
  sim->add_option("--step", step, "quantizer step");
  sim->add_option("--mode", mode, "UQ, DQ or NQ");
  sim->add_option("--n", n, "sample count");
  auto* scales_opt =
      sim->add_option("--scales", scales, "decoder scales (default: boundary family)")
          ->delimiter(',');
  sim->add_option("--scale-count", scale_count, "size of the boundary family");
  sim->add_option("--dither-bins", bins, "dither bins for the rate estimate");
  sim->add_option("--workers", workers, "worker threads");
  sim->add_option("--stream", stream, "RNG stream index");

  auto* disc = app.add_subcommand("discrete", "finite-alphabet R(D,P) solver");
  add_common(disc);
  disc->add_option("--model", model_file, "JSON model file");
  disc->add_option("--distortion", distortion, "distortion bound or 'unconstrained'");
  disc->add_option("--perception", perception, "perception bound or 'unconstrained'");
  disc->add_option("--tolerance", tolerance, "solver tolerance in bits");
  disc->add_option("--max-iters", max_iters, "Newton step budget");

  auto* ref = app.add_subcommand("refine", "two-stage Gaussian refinement");
  add_common(ref);
  add_source(ref);
  ref->add_option("--r1", r1, "first-stage rate");
  ref->add_option("--r2", r2, "total rate after the second stage");
  ref->add_option("--knots", knots, "knots per boundary check");
  ref->add_option("--dimension", dimension, "source dimension m for delta_R");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rdplab::cli::kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (mean || variance) {
      json s = json::object();
      put(s, "mean", mean);
      put(s, "variance", variance);
      flags["source"] = s;
    }
    if (rates_opt->count() > 0) flags["rates"] = number_list(rates, "--rates");
    if (scales_opt->count() > 0) flags["scales"] = number_list(scales, "--scales");
    put(flags, "knots", knots);
    put(flags, "rate", rate);
    put(flags, "step", step);
    put(flags, "mode", mode);
    put(flags, "n", n);
    put(flags, "scale_count", scale_count);
    put(flags, "dither_bins", bins);
    put(flags, "workers", workers);
    put(flags, "stream", stream);
    put(flags, "tolerance", tolerance);
    put(flags, "max_iters", max_iters);
    put(flags, "r1", r1);
    put(flags, "r2", r2);
    put(flags, "dimension", dimension);
    put(flags, "seed", common.seed);
    if (model_file) flags["model"] = read_config(*model_file);
    if (distortion || perception) {
      auto bound = [](const std::optional<std::string>& s) -> json {
        if (!s || *s == "unconstrained") return "unconstrained";
        try {
          return std::stod(*s);
        } catch (const std::exception&) {
          throw rdplab::cli::UsageError("bound must be a number or 'unconstrained': " + *s);
        }
      };
      flags["constraints"] = json::array({{{"distortion", bound(distortion)},
                                           {"perception", bound(perception)}}});
    }
    const json cfg = rdplab::cli::resolve_config(cmd, read_config(common.config), flags);
    return rdplab::cli::run_command(cmd, cfg, common.out, std::cout);
  } catch (const rdplab::cli::UsageError& e) {
    std::cerr << "rdplab " << cmd << ": usage error: " << e.what() << "\n";
    return rdplab::cli::kUsage;
  } catch (const rdplab::InfeasibleError& e) {
    std::cerr << "rdplab " << cmd << ": infeasible: " << e.what() << "\n";
    return rdplab::cli::kInfeasible;
  } catch (const rdplab::NumericalError& e) {
    std::cerr << "rdplab " << cmd << ": numerical failure: " << e.what() << "\n";
    return rdplab::cli::kNumerical;
  } catch (const json::exception& e) {
    std::cerr << "rdplab " << cmd << ": invalid config: " << e.what() << "\n";
    return rdplab::cli::kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "rdplab " << cmd << ": usage error: " << e.what() << "\n";
    return rdplab::cli::kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "rdplab " << cmd << ": invalid parameters: " << e.what() << "\n";
    return rdplab::cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "rdplab " << cmd << ": error: " << e.what() << "\n";
    return rdplab::cli::kNumerical;
  }
}
