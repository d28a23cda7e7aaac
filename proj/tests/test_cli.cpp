// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "rdplab_cli_test";

/// Runs the CLI with the given arguments (and optional env prefix); returns
/// its exit status.
int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = "env -u RDPLAB_SEED " + env + " " + RDPLAB_CLI_PATH + " " + args +
                          " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

json config_line(const fs::path& csv) {
  std::ifstream f(csv);
  std::string line;
  std::getline(f, line);
  const std::string tag = "# config: ";
  EXPECT_EQ(line.rfind(tag, 0), 0u) << line;
  return json::parse(line.substr(tag.size()));
}

std::vector<std::vector<std::string>> rows(const fs::path& csv) {
  std::ifstream f(csv);
  std::string line;
  std::vector<std::vector<std::string>> out;
  while (std::getline(f, line)) {
    if (line.rfind('#', 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream s(line);
    std::string c;
    while (std::getline(s, c, ',')) cells.push_back(c);
    out.push_back(cells);
  }
  return out;
}

fs::path out_dir(const std::string& name) {
  const auto p = kWork / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("bogus"), 2);
  EXPECT_EQ(run("curve --no-such-flag"), 2);
  EXPECT_EQ(run("curve --rates \"\" --out " + out_dir("u1").string()), 2);
  EXPECT_EQ(run("refine --r1 1.0 --r2 0.5 --out " + out_dir("u2").string()), 2);
  EXPECT_EQ(run("simulate --n 0 --out " + out_dir("u3").string()), 2);
  EXPECT_EQ(run("curve --config /nonexistent/cfg.json --out " + out_dir("u4").string()), 2);
  EXPECT_EQ(run("curve --out " + out_dir("u5").string(), "RDPLAB_SEED=abc"), 2);
}

TEST(Cli, CurveBoundariesStartAtPerfectPerception) {
  const auto out = out_dir("curve");
  ASSERT_EQ(run("curve --rates 0.1,0.2,0.4,1.0 --out " + out.string()), 0);
  const double rates[] = {0.1, 0.2, 0.4, 1.0};
  for (int i = 0; i < 4; ++i) {
    const auto r = rows(out / ("boundary_" + std::to_string(i) + ".csv"));
    ASSERT_GE(r.size(), 3u);
    EXPECT_EQ(r[0], (std::vector<std::string>{"perception", "distortion"}));
    const double rho = std::sqrt(1.0 - std::exp2(-2.0 * rates[i]));
    EXPECT_EQ(std::stod(r[1][0]), 0.0);
    EXPECT_NEAR(std::stod(r[1][1]), 2.0 - 2.0 * rho, 1e-11);
  }
  EXPECT_TRUE(fs::exists(out / "surface.csv"));
  EXPECT_TRUE(fs::exists(out / "curve.json"));
}

TEST(Cli, CurveAtZeroRate) {
  const auto out = out_dir("curve0");
  ASSERT_EQ(run("curve --rates 0 --variance 2 --out " + out.string()), 0);
  const auto r = rows(out / "boundary_0.csv");
  EXPECT_NEAR(std::stod(r[1][1]), 4.0, 1e-12);
  EXPECT_NEAR(std::stod(r.back()[0]), 2.0, 1e-12);
  EXPECT_NEAR(std::stod(r.back()[1]), 2.0, 1e-12);
}

TEST(Cli, RegionIntercepts) {
  const auto out = out_dir("region");
  const auto cfg = kWork / "region_cfg.json";
  std::ofstream(cfg) << R"({"rate": 1.0, "representations": [
      {"name": "canonical", "canonical_rate": 1.0},
      {"name": "coarse", "canonical_rate": 0.5},
      {"name": "zero", "mmse_distortion": 1.0, "mmse_std": 0.0},
      {"name": "lossless", "mmse_distortion": 0.0, "mmse_std": 1.0}]})";
  ASSERT_EQ(run("region --config " + cfg.string() + " --out " + out.string()), 0);
  const double fine = std::stod(rows(out / "region_canonical.csv")[1][1]);
  const double coarse = std::stod(rows(out / "region_coarse.csv")[1][1]);
  EXPECT_NEAR(fine, 2.0 - 2.0 * std::sqrt(0.75), 1e-11);
  EXPECT_LT(fine, coarse);
  EXPECT_NEAR(std::stod(rows(out / "region_zero.csv")[1][1]), 2.0, 1e-12);
  for (const auto& r : rows(out / "region_lossless.csv"))
    if (r[0] != "perception") EXPECT_EQ(std::stod(r[1]), 0.0);
  const auto j = json::parse(slurp(out / "region.json"));
  EXPECT_TRUE(j["results"].contains("boundary_model"));
  EXPECT_EQ(rows(out / "gap_bounds.csv").size(), 10u);
}

TEST(Cli, SimulateDefaultSweep) {
  const auto out = out_dir("sim");
  ASSERT_EQ(run("simulate --n 50000 --out " + out.string()), 0);
  const auto r = rows(out / "sweep.csv");
  EXPECT_EQ(r[0], (std::vector<std::string>{"scale", "rate_bits", "distortion", "perception", "n"}));
  EXPECT_EQ(r.size(), 21u);
  EXPECT_TRUE(fs::exists(out / "quantizers.csv"));
  EXPECT_TRUE(fs::exists(out / "dither.csv"));
  const auto j = json::parse(slurp(out / "sweep.json"));
  EXPECT_EQ(j["config"]["seed"], 1);
  EXPECT_TRUE(j["results"].contains("rate_estimator"));
}

TEST(Cli, SimulateIsByteIdenticalForEqualSeeds) {
  const auto a = out_dir("det_a"), b = out_dir("det_b"), c = out_dir("det_c");
  ASSERT_EQ(run("simulate --n 40000 --seed 9 --out " + a.string()), 0);
  ASSERT_EQ(run("simulate --n 40000 --seed 9 --out " + b.string()), 0);
  ASSERT_EQ(run("simulate --n 40000 --seed 10 --out " + c.string()), 0);
  for (const char* f : {"sweep.csv", "quantizers.csv", "dither.csv", "sweep.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_NE(rows(a / "sweep.csv"), rows(c / "sweep.csv"));
}

TEST(Cli, SeedPrecedence) {
  const auto cfg = kWork / "seed_cfg.json";
  fs::create_directories(kWork);
  std::ofstream(cfg) << R"({"seed": 21})";
  auto seed_of = [](const fs::path& out) {
    return config_line(out / "corners.csv")["seed"].get<std::uint64_t>();
  };
  auto o = out_dir("s1");
  ASSERT_EQ(run("refine --out " + o.string()), 0);
  EXPECT_EQ(seed_of(o), 1u);
  o = out_dir("s2");
  ASSERT_EQ(run("refine --out " + o.string(), "RDPLAB_SEED=33"), 0);
  EXPECT_EQ(seed_of(o), 33u);
  o = out_dir("s3");
  ASSERT_EQ(run("refine --config " + cfg.string() + " --out " + o.string(), "RDPLAB_SEED=33"), 0);
  EXPECT_EQ(seed_of(o), 21u);
  o = out_dir("s4");
  ASSERT_EQ(run("refine --seed 5 --config " + cfg.string() + " --out " + o.string(),
                "RDPLAB_SEED=33"),
            0);
  EXPECT_EQ(seed_of(o), 5u);
}

TEST(Cli, DiscreteSolvedAndInfeasible) {
  auto out = out_dir("disc");
  ASSERT_EQ(run("discrete --out " + out.string()), 0);
  auto j = json::parse(slurp(out / "discrete.json"));
  const auto& res = j["results"]["solutions"][0]["result"];
  EXPECT_EQ(res["status"], "solved");
  EXPECT_NEAR(res["rate_bits"].get<double>(), 0.5, 1e-3);
  EXPECT_EQ(res["channel"].size(), 2u);

  const auto cfg = kWork / "disc_cfg.json";
  std::ofstream(cfg) << R"({"constraints": [{"distortion": -0.1, "perception": 0.0}]})";
  out = out_dir("disc_bad");
  EXPECT_EQ(run("discrete --config " + cfg.string() + " --out " + out.string()), 3);
  j = json::parse(slurp(out / "discrete.json"));
  EXPECT_EQ(j["results"]["solutions"][0]["result"]["status"], "infeasible");
  EXPECT_EQ(rows(out / "discrete.csv")[1][2], "infeasible");
}

TEST(Cli, RefineReport) {
  const auto out = out_dir("refine");
  ASSERT_EQ(run("refine --r1 0.5 --r2 1.0 --out " + out.string()), 0);
  const auto j = json::parse(slurp(out / "refine.json"))["results"];
  EXPECT_NEAR(j["information"]["i_x_z1"].get<double>(), 0.5, 1e-9);
  EXPECT_NEAR(j["information"]["i_x_z2"].get<double>(), 1.0, 1e-9);
  EXPECT_TRUE(j["stage_one_covers_omega"].get<bool>());
  EXPECT_TRUE(j["stage_two_covers_omega"].get<bool>());
  const auto r = rows(out / "corners.csv");
  EXPECT_EQ(r[1], (std::vector<std::string>{"outer", "0.5", "0.5"}));
}

TEST(Cli, EveryCsvEmbedsTheResolvedConfig) {
  const auto out = out_dir("embed");
  ASSERT_EQ(run("curve --seed 77 --out " + out.string()), 0);
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().extension() == ".csv") {
      const auto c = config_line(e.path());
      EXPECT_EQ(c["seed"], 77);
      EXPECT_EQ(c["command"], "curve");
    } else {
      EXPECT_EQ(json::parse(slurp(e.path()))["config"]["seed"], 77);
    }
  }
}
