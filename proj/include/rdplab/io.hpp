// Copyright 2026 The rdplab Authors.
// SPDX-License-Identifier: Apache-2.0

// CSV and JSON serialization. CSV numbers carry 12 significant digits and
// every file starts with a "# config: {...}" line holding the resolved run
// configuration.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "rdplab/discrete_rdp.hpp"
#include "rdplab/mc_codec.hpp"
#include "rdplab/types.hpp"

namespace rdplab::io {

using json = nlohmann::json;

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

using Cell = std::variant<double, std::int64_t, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != header.size())
      throw std::logic_error("CsvTable: row width does not match header");
    rows.push_back(std::move(row));
  }
};

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

inline std::string to_csv(const CsvTable& t, const json& config) {
  std::ostringstream out;
  out << "# config: " << config.dump() << "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i)
    out << (i ? "," : "") << t.header[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_cell(row[i]);
    out << "\n";
  }
  return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

/// Bounds serialize as numbers, Unconstrained as the string "unconstrained".
inline json bound_to_json(const Bound& b) {
  return b.is_unconstrained() ? json("unconstrained") : json(b.value());
}

inline Bound bound_from_json(const json& j) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "unconstrained"))
    return unconstrained;
  if (!j.is_number()) throw std::invalid_argument("bound must be a number or \"unconstrained\"");
  return Bound(j.get<double>());
}

inline json rate_to_json(Rate r) {
  return r.is_finite() ? json(r.bits()) : json("inf");
}

inline CsvTable boundary_table(const RegionBoundary& b) {
  CsvTable t{{"perception", "distortion"}, {}};
  for (const auto& k : b.knots) t.add({k.perception, k.distortion});
  return t;
}

inline json boundary_to_json(const RegionBoundary& b) {
  json knots = json::array();
  for (const auto& k : b.knots)
    knots.push_back({{"perception", k.perception}, {"distortion", k.distortion}});
  return {{"rate_bits", rate_to_json(b.rate)}, {"knots", knots}};
}

inline CsvTable sweep_table(const std::vector<EmpiricalPoint>& pts) {
  CsvTable t{{"scale", "rate_bits", "distortion", "perception", "n"}, {}};
  for (const auto& p : pts)
    t.add({p.scale, p.rate_bits, p.distortion, p.perception,
           static_cast<std::int64_t>(p.n)});
  return t;
}

inline json sweep_to_json(const std::vector<EmpiricalPoint>& pts) {
  json a = json::array();
  for (const auto& p : pts)
    a.push_back({{"scale", p.scale},
                 {"rate_bits", p.rate_bits},
                 {"distortion", p.distortion},
                 {"perception", p.perception},
                 {"n", p.n}});
  return a;
}

inline PerceptionKind perception_kind_from_string(const std::string& s) {
  if (s == "total_variation" || s == "tv") return PerceptionKind::TotalVariation;
  if (s == "w2_squared_on_line" || s == "w2") return PerceptionKind::W2SquaredOnLine;
  throw std::invalid_argument("unknown perception kind: " + s);
}

/// {"source_pmf": [...], "distortion": [[...], ...] | "hamming",
///  "extra_outputs": k, "perception": "total_variation" | "w2_squared_on_line",
///  "output_points": [...]}
inline DiscreteModel model_from_json(const json& j) {
  if (!j.contains("source_pmf")) throw std::invalid_argument("model: missing source_pmf");
  auto pmf = j.at("source_pmf").get<std::vector<double>>();
  const auto kind = perception_kind_from_string(j.value("perception", std::string("total_variation")));
  std::vector<double> points = j.value("output_points", std::vector<double>{});
  const json& d = j.contains("distortion") ? j.at("distortion") : json("hamming");
  if (d.is_string()) {
    if (d.get<std::string>() != "hamming")
      throw std::invalid_argument("model: distortion must be a matrix or \"hamming\"");
    auto m = DiscreteModel::hamming(std::move(pmf), kind, j.value("extra_outputs", std::size_t{0}));
    if (!points.empty()) {
      m.output_points = std::move(points);
      m.validate();
    }
    return m;
  }
  return DiscreteModel(std::move(pmf),
                       Matrix::from_rows(d.get<std::vector<std::vector<double>>>()),
                       kind, std::move(points));
}

inline json model_to_json(const DiscreteModel& m) {
  return {{"source_pmf", m.source_pmf},
          {"distortion", m.distortion.to_rows()},
          {"perception", to_string(m.perception_kind)},
          {"output_points", m.output_points}};
}

inline json solve_result_to_json(const SolveResult& r) {
  json j;
  j["status"] = r.status == SolveStatus::Solved ? "solved" : "infeasible";
  j["rate_bits"] = rate_to_json(r.rate);
  if (r.channel) {
    j["channel"] = r.channel->matrix().to_rows();
    j["distortion"] = r.distortion;
    j["perception"] = r.perception;
  }
  j["newton_steps"] = r.iterations;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

}  // namespace rdplab::io
