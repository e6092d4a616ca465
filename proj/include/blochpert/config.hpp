#pragma once

// Experiment configuration: JSON parsing with positional diagnostics,
// hermitian closure of the potential, round-trip serialization, and the
// manifest that makes every artifact regenerable.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "blochpert/common.hpp"
#include "blochpert/geometry.hpp"
#include "blochpert/lattice.hpp"
#include "blochpert/potential.hpp"
#include "blochpert/version.hpp"

namespace blochpert {

using json = nlohmann::json;

struct ExperimentConfig {
  Mat lattice_basis;
  int smoothness = 0;  // 0 => mode default
  std::map<Coords, cplx> potential;
  std::vector<std::string> notes;  // loader notes (e.g. auto-closed conjugates)
  double rho = 10.0;
  ParamMode mode = ParamMode::Paper;
  ParamOverrides overrides;
  double oracle_cutoff = 0.0;           // 0 => default rule
  double oracle_window_halfwidth = 0.0;  // 0 => default rule
  int oracle_basis_cap = 20000;
  uint64_t seed = 1;
  std::string out_path = "out";
  std::string format = "json";  // or "csv"

  Lattice lattice() const { return Lattice(lattice_basis); }
  DualLattice dual_lattice() const { return dual(lattice()); }
  AsymptoticParams params() const {
    return AsymptoticParams(static_cast<int>(lattice_basis.rows()), rho, mode,
                            smoothness, overrides);
  }
  FourierPotential fourier_potential() const {
    return FourierPotential(dual_lattice(), effective_smoothness(), potential);
  }
  int effective_smoothness() const {
    if (smoothness > 0) return smoothness;
    return static_cast<int>(std::ceil(
        default_smoothness(static_cast<int>(lattice_basis.rows()), mode)));
  }
};

namespace detail {

inline std::pair<int, int> line_col(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline double num_at(const json& j, const char* what) {
  if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
  return j.get<double>();
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("line " + std::to_string(line) + ", col " +
                      std::to_string(col) + ": " + e.what());
  }

  ExperimentConfig cfg;
  if (!root.contains("lattice") || !root["lattice"].contains("basis"))
    throw ConfigError("missing lattice.basis");
  const json& rows = root["lattice"]["basis"];
  if (!rows.is_array() || rows.empty()) throw ConfigError("lattice.basis must be an array of rows");
  const int d = static_cast<int>(rows.size());
  cfg.lattice_basis.resize(d, d);
  for (int i = 0; i < d; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != d)
      throw ConfigError("lattice.basis row " + std::to_string(i) + " must have " +
                        std::to_string(d) + " entries");
    for (int j = 0; j < d; ++j)
      cfg.lattice_basis(i, j) = detail::num_at(rows[i][j], "lattice entry");
  }
  {
    // validation with echo of the offending rows
    double det = cfg.lattice_basis.determinant();
    if (std::abs(det) < 1e-12) {
      std::ostringstream os;
      os << "lattice basis is singular; rows:";
      for (int i = 0; i < d; ++i) {
        os << " (";
        for (int j = 0; j < d; ++j) os << (j ? "," : "") << cfg.lattice_basis(i, j);
        os << ")";
      }
      throw InvalidLattice(os.str());
    }
  }

  if (root.contains("potential")) {
    const json& pot = root["potential"];
    if (pot.contains("smoothness"))
      cfg.smoothness = pot["smoothness"].get<int>();
    if (pot.contains("entries")) {
      for (const json& e : pot["entries"]) {
        if (!e.contains("gamma")) throw ConfigError("potential entry missing gamma");
        Coords g;
        for (const json& c : e["gamma"]) {
          if (!c.is_number_integer())
            throw ConfigError("potential gamma coordinates must be integers");
          g.push_back(c.get<long long>());
        }
        if (static_cast<int>(g.size()) != d)
          throw ConfigError("potential gamma has wrong dimension");
        if (is_zero(g)) throw ConfigError("potential entry at gamma = 0 is not allowed");
        cplx v(e.value("re", 0.0), e.value("im", 0.0));
        auto it = cfg.potential.find(g);
        if (it != cfg.potential.end() &&
            std::abs(it->second - v) > 1e-12 * (1.0 + std::abs(v)))
          throw ConfigError("inconsistent duplicate entry at " + coords_str(g));
        cfg.potential[g] = v;
      }
      // hermitian closure: complete missing conjugates, reject inconsistency
      for (auto& [g, v] : std::map<Coords, cplx>(cfg.potential)) {
        Coords ng = negate(g);
        auto it = cfg.potential.find(ng);
        if (it == cfg.potential.end()) {
          cfg.potential[ng] = std::conj(v);
          cfg.notes.push_back("auto-completed conjugate at " + coords_str(ng));
        } else if (std::abs(it->second - std::conj(v)) >
                   1e-12 * (1.0 + std::abs(v))) {
          throw ConfigError("entries at " + coords_str(g) + " and " + coords_str(ng) +
                            " are not conjugate");
        }
      }
    }
  }

  cfg.rho = root.value("rho", 10.0);
  std::string mode = root.value("mode", "paper");
  if (mode == "paper")
    cfg.mode = ParamMode::Paper;
  else if (mode == "resonance-sec6")
    cfg.mode = ParamMode::ResonanceSec6;
  else
    throw ConfigError("mode must be 'paper' or 'resonance-sec6'");

  if (root.contains("overrides")) {
    const json& ov = root["overrides"];
    if (ov.contains("thresholds"))
      for (const json& t : ov["thresholds"])
        cfg.overrides.thresholds.push_back(t.get<double>());
    auto opt = [&](const char* k) -> std::optional<double> {
      if (ov.contains(k)) return ov[k].get<double>();
      return std::nullopt;
    };
    cfg.overrides.series_radius = opt("series_radius");
    cfg.overrides.dir_radius = opt("dir_radius");
    cfg.overrides.eps1 = opt("eps1");
    cfg.overrides.block_b_radius = opt("block_b_radius");
    cfg.overrides.block_a_radius = opt("block_a_radius");
    cfg.overrides.ladder_base = opt("ladder_base");
    if (ov.contains("known_order")) cfg.overrides.known_order = ov["known_order"].get<int>();
    if (ov.contains("known_order_res"))
      cfg.overrides.known_order_res = ov["known_order_res"].get<int>();
    if (ov.contains("site_cap")) cfg.overrides.site_cap = ov["site_cap"].get<int>();
    if (ov.contains("hill_basis")) cfg.overrides.hill_basis = ov["hill_basis"].get<int>();
  }

  if (root.contains("oracle")) {
    const json& oc = root["oracle"];
    cfg.oracle_cutoff = oc.value("cutoff", 0.0);
    if (oc.contains("window_halfwidth"))
      cfg.oracle_window_halfwidth = oc["window_halfwidth"].get<double>();
    cfg.oracle_basis_cap = oc.value("basis_cap", 20000);
  }
  cfg.seed = root.value("seed", 1ULL);
  if (root.contains("output")) {
    cfg.out_path = root["output"].value("path", "out");
    cfg.format = root["output"].value("format", "json");
    if (cfg.format != "json" && cfg.format != "csv")
      throw ConfigError("output.format must be json or csv");
  }

  // constructing the derived objects validates the rest
  cfg.params();
  cfg.fourier_potential();
  return cfg;
}

inline json serialize_config(const ExperimentConfig& cfg) {
  json root;
  const int d = static_cast<int>(cfg.lattice_basis.rows());
  json rows = json::array();
  for (int i = 0; i < d; ++i) {
    json row = json::array();
    for (int j = 0; j < d; ++j) row.push_back(cfg.lattice_basis(i, j));
    rows.push_back(row);
  }
  root["lattice"]["basis"] = rows;
  json entries = json::array();
  for (const auto& [g, v] : cfg.potential) {
    json e;
    e["gamma"] = g;
    e["re"] = v.real();
    e["im"] = v.imag();
    entries.push_back(e);
  }
  root["potential"]["entries"] = entries;
  if (cfg.smoothness > 0) root["potential"]["smoothness"] = cfg.smoothness;
  root["rho"] = cfg.rho;
  root["mode"] = cfg.mode == ParamMode::Paper ? "paper" : "resonance-sec6";
  json ov;
  if (!cfg.overrides.thresholds.empty()) ov["thresholds"] = cfg.overrides.thresholds;
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) ov[k] = *v;
  };
  put("series_radius", cfg.overrides.series_radius);
  put("dir_radius", cfg.overrides.dir_radius);
  put("eps1", cfg.overrides.eps1);
  put("block_b_radius", cfg.overrides.block_b_radius);
  put("block_a_radius", cfg.overrides.block_a_radius);
  put("ladder_base", cfg.overrides.ladder_base);
  if (cfg.overrides.known_order) ov["known_order"] = *cfg.overrides.known_order;
  if (cfg.overrides.known_order_res) ov["known_order_res"] = *cfg.overrides.known_order_res;
  if (cfg.overrides.site_cap) ov["site_cap"] = *cfg.overrides.site_cap;
  if (cfg.overrides.hill_basis) ov["hill_basis"] = *cfg.overrides.hill_basis;
  if (!ov.empty()) root["overrides"] = ov;
  if (cfg.oracle_cutoff > 0) root["oracle"]["cutoff"] = cfg.oracle_cutoff;
  if (cfg.oracle_window_halfwidth > 0)
    root["oracle"]["window_halfwidth"] = cfg.oracle_window_halfwidth;
  if (cfg.oracle_basis_cap != 20000) root["oracle"]["basis_cap"] = cfg.oracle_basis_cap;
  root["seed"] = cfg.seed;
  root["output"]["path"] = cfg.out_path;
  root["output"]["format"] = cfg.format;
  return root;
}

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Manifest: enough to regenerate the artifact byte-for-byte.
inline json make_manifest(const ExperimentConfig& cfg, const std::string& command,
                          const std::vector<std::string>& args) {
  json m;
  json c = serialize_config(cfg);
  m["config"] = c;
  std::ostringstream os;
  os << c.dump();
  m["config_hash"] = fnv1a(os.str());
  m["seed"] = cfg.seed;
  m["command"] = command;
  m["args"] = args;
  m["version"] = kVersion;
  return m;
}

}  // namespace blochpert
