#pragma once

// CSV (RFC 4180, CRLF, 12 significant digits) and JSON output.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "sta/dynamics.hpp"
#include "sta/errors.hpp"
#include "sta/experiments.hpp"
#include "sta/nv_model.hpp"
#include "sta/two_level.hpp"
#include "sta/version.hpp"

namespace sta::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row) {
    if (row.size() != header.size()) throw ParameterError("CsvTable: row width does not match the header");
    rows.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_field(header[i]);
    out += "\r\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
      out += "\r\n";
    }
    return out;
  }
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

inline void write_csv(const fs::path& path, const CsvTable& table) { write_text(path, table.str()); }

inline void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

inline json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ParameterError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Tables

/// Two-level pulses: s, g_x, g_y, g_z, f (the residual coefficient).
inline CsvTable two_level_pulse_table(const TwoLevelPulses& p, int samples = 1001) {
  CsvTable t{{"s", "g_x", "g_y", "g_z", "f_residual"}, {}};
  for (double s : experiments::linspace(0.0, 1.0, samples)) {
    const auto g = p.drive(s);
    t.add_row({s, g.x, g.y, g.z, p.residual(s)});
  }
  return t;
}

/// NV design: s, Ω̃1, Ω̃2, α, θ and the physical pulses Ω1, Ω2.
inline CsvTable nv_design_table(const ThreeLevelPulses& d, int samples = 1001) {
  CsvTable t{{"s", "OmegaTilde1", "OmegaTilde2", "alpha", "theta", "Omega1", "Omega2"}, {}};
  for (double s : experiments::linspace(0.0, 1.0, samples)) {
    const auto [o1, o2] = d.omegas(s);
    t.add_row({s, o1, o2, d.alpha(s), d.theta(s), nv::physical_omega1(o1), nv::physical_omega2(o2)});
  }
  return t;
}

/// Any pulse pair: s, Ω1, Ω2 (physical) and Ω̃1, Ω̃2.
inline CsvTable pulse_pair_table(const nv::PulsePair& p, int samples = 1001) {
  CsvTable t{{"s", "Omega1", "Omega2", "OmegaTilde1", "OmegaTilde2"}, {}};
  for (double s : experiments::linspace(0.0, 1.0, samples)) {
    const double o1 = p.omega1(s), o2 = p.omega2(s);
    t.add_row({s, o1, o2, nv::design_omega1(o1), nv::design_omega2(o2)});
  }
  return t;
}

/// s, P1..PN, F; every `stride`-th sample plus the final one.
template <int N, class State>
CsvTable trajectory_table(const Trajectory<N, State>& traj, int stride = 10) {
  CsvTable t;
  t.header.push_back("s");
  for (int k = 1; k <= N; ++k) t.header.push_back("P" + std::to_string(k));
  t.header.push_back("F");
  const std::size_t n = traj.times.size();
  const auto step = static_cast<std::size_t>(std::max(1, stride));
  std::vector<std::size_t> picks;
  for (std::size_t i = 0; i < n; i += step) picks.push_back(i);
  if (n > 0 && picks.back() != n - 1) picks.push_back(n - 1);
  for (std::size_t i : picks) {
    std::vector<double> row{traj.times[i]};
    for (int k = 0; k < N; ++k) row.push_back(traj.populations[i][k]);
    row.push_back(traj.fidelity.empty() ? 0.0 : traj.fidelity[i]);
    t.add_row(std::move(row));
  }
  return t;
}

/// Long format: axis columns then the value.
inline CsvTable sweep_table(const experiments::SweepGrid& g) {
  CsvTable t;
  for (const auto& a : g.axes) t.header.push_back(a.label);
  t.header.push_back(g.quantity);
  if (g.axes.size() == 1) {
    for (std::size_t i = 0; i < g.shape(0); ++i) t.add_row({g.axes[0].samples[i], g.at(i)});
  } else {
    for (std::size_t i = 0; i < g.shape(0); ++i) {
      for (std::size_t j = 0; j < g.shape(1); ++j) t.add_row({g.axes[0].samples[i], g.axes[1].samples[j], g.at(i, j)});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const nv::NvConfig& c) {
  json j{{"lambda", c.lambda}, {"A", c.a}, {"kappa", c.kappa}, {"gamma", c.gamma}};
  j["B"] = c.b ? json(*c.b) : json("auto");
  return j;
}

inline json to_json(const nv::PulsePair& p) {
  json params = json::object();
  for (const auto& [k, v] : p.parameters) params[k] = v;
  return {{"provenance", nv::to_string(p.provenance)}, {"parameters", params}};
}

/// Basis labels, couplings, rates and pulse provenance.
inline json model_export(const nv::NvConfig& c, const nv::PulsePair& p, nv::DecayModel decay) {
  return {{"basis", nv::kBasisLabels},   {"lambda", c.lambda}, {"kappa", c.kappa},
          {"gamma", c.gamma},            {"decay_model", nv::to_string(decay)},
          {"pulses", to_json(p)}};
}

inline json to_json(const experiments::Checkpoint& c) {
  return {{"name", c.name}, {"value", c.value}, {"reference", c.reference}, {"tolerance", c.tolerance},
          {"passed", c.passed()}, {"description", c.describe()}};
}

inline json sweep_metadata(const experiments::SweepGrid& g) {
  json axes = json::array();
  for (const auto& a : g.axes) axes.push_back({{"label", a.label}, {"samples", a.samples}});
  json notes = json::object();
  for (const auto& [k, v] : g.notes) notes[k] = v;
  return {{"quantity", g.quantity}, {"axes", axes}, {"config", to_json(g.config)}, {"pulses", to_json(g.pulses)},
          {"notes", notes}};
}

inline std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

/// `explicit_dir` when given, else <root>/<pipeline>-<timestamp> with root from
/// STA_OUTPUT_ROOT (default ./sta-output). Created on return.
inline fs::path output_directory(const std::string& pipeline, const std::string& explicit_dir = {}) {
  fs::path dir;
  if (!explicit_dir.empty()) {
    dir = explicit_dir;
  } else {
    const char* env = std::getenv("STA_OUTPUT_ROOT");
    const fs::path root = env && *env ? fs::path(env) : fs::path("sta-output");
    const std::string stem = pipeline + "-" + timestamp();
    dir = root / stem;
    for (int k = 1; fs::exists(dir); ++k) dir = root / (stem + "-" + std::to_string(k));
  }
  fs::create_directories(dir);
  return dir;
}

inline json manifest_header(const std::string& command, const std::string& target) {
  return {{"tool", "sta"}, {"version", kVersion}, {"command", command}, {"target", target},
          {"created", timestamp()}};
}

}  // namespace sta::io
