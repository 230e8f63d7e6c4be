#pragma once
// io.hpp — CSV and JSON output, config parsing, hashing, and the per-run
// manifest. Numeric CSV fields are written with "%.17g" so round-trips are
// exact for doubles; lines end with '\n'; headers are mandatory.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlslab/dichotomy.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/model.hpp"

namespace nlslab {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io_error", m) {}
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : os_(path) {
    if (!os_) throw IoError("cannot open " + path + " for writing");
    for (size_t k = 0; k < header.size(); ++k)
      os_ << (k ? "," : "") << header[k];
    os_ << '\n';
    cols_ = header.size();
  }

  void row(const std::vector<double>& vals) {
    if (vals.size() != cols_) throw IoError("csv row arity mismatch");
    for (size_t k = 0; k < vals.size(); ++k)
      os_ << (k ? "," : "") << format_g17(vals[k]);
    os_ << '\n';
  }

  void row_mixed(const std::vector<std::string>& vals) {
    if (vals.size() != cols_) throw IoError("csv row arity mismatch");
    for (size_t k = 0; k < vals.size(); ++k)
      os_ << (k ? "," : "") << vals[k];
    os_ << '\n';
  }

private:
  std::ofstream os_;
  size_t cols_ = 0;
};

// Minimal numeric CSV reader (header + double columns), for the decompose
// subcommand's field input.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int col(const std::string& name) const {
    for (size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return int(k);
    throw IoError("csv column '" + name + "' not found");
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty csv " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ','))
      row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != t.header.size())
      throw IoError("csv row arity mismatch in " + path);
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Canonical JSON and hashing. nlohmann::json stores object keys sorted, so
// dump() of a reassembled object is already canonical.
// ---------------------------------------------------------------------------
inline std::string canonical_dump(const json& j) { return j.dump(); }

inline std::string fnv1a64_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

inline std::string config_hash(const json& cfg) {
  return fnv1a64_hex(canonical_dump(cfg));
}

inline std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Config structs <-> JSON
// ---------------------------------------------------------------------------
struct ModelConfig {
  int N = 3;
  std::string kind = "pure_power"; // pure_power | two_term | linear
  double m = 3.0;                  // pure_power exponent
  double c1 = 1.0, m1 = 3.0, c2 = 0.0, m2 = 5.0;

  NonlinearityModel build() const {
    if (kind == "pure_power") return NonlinearityModel::pure_power(N, m);
    if (kind == "two_term")
      return NonlinearityModel::two_term(N, c1, m1, c2, m2);
    if (kind == "linear") return NonlinearityModel::linear(N);
    throw DomainError("unknown model kind '" + kind + "'");
  }
};

inline void to_json(json& j, const ModelConfig& c) {
  j = json{{"N", c.N}, {"kind", c.kind}};
  if (c.kind == "pure_power") j["m"] = c.m;
  if (c.kind == "two_term") {
    j["c1"] = c.c1;
    j["m1"] = c.m1;
    j["c2"] = c.c2;
    j["m2"] = c.m2;
  }
}
inline void from_json(const json& j, ModelConfig& c) {
  c.N = j.at("N").get<int>();
  c.kind = j.value("kind", std::string("pure_power"));
  c.m = j.value("m", 3.0);
  c.c1 = j.value("c1", 1.0);
  c.m1 = j.value("m1", 3.0);
  c.c2 = j.value("c2", 0.0);
  c.m2 = j.value("m2", 5.0);
}

struct GridConfig {
  double R = 15.0;
  int M = 1024;
};
inline void to_json(json& j, const GridConfig& c) {
  j = json{{"R", c.R}, {"M", c.M}};
}
inline void from_json(const json& j, GridConfig& c) {
  c.R = j.at("R").get<double>();
  c.M = j.at("M").get<int>();
}

inline void to_json(json& j, const SpongeConfig& c) {
  j = json{{"enabled", c.enabled},
           {"strength", c.strength},
           {"start_frac", c.start_frac}};
}
inline void from_json(const json& j, SpongeConfig& c) {
  c.enabled = j.value("enabled", false);
  c.strength = j.value("strength", 3.0);
  c.start_frac = j.value("start_frac", 0.9);
}

inline void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"R", c.R},
           {"M", c.M},
           {"omega0", c.omega0},
           {"theta0", c.theta0},
           {"omega_lo", c.omega_lo},
           {"omega_hi", c.omega_hi},
           {"c_plus", c.c_plus},
           {"c_minus", c.c_minus},
           {"c_cont", c.c_cont},
           {"bump_center", c.bump_center},
           {"bump_width", c.bump_width},
           {"alpha_target", c.alpha_target},
           {"alpha0", c.alpha0},
           {"R0", c.R0},
           {"dt", c.dt},
           {"t_max", c.t_max},
           {"obs_stride_t", c.obs_stride_t},
           {"sponge", c.sponge},
           {"guard_factor", c.guard_factor}};
}
inline void from_json(const json& j, ExperimentConfig& c) {
  c.R = j.value("R", 24.0);
  c.M = j.value("M", 768);
  c.omega0 = j.value("omega0", 1.0);
  c.theta0 = j.value("theta0", 0.0);
  c.omega_lo = j.value("omega_lo", 0.5);
  c.omega_hi = j.value("omega_hi", 1.5);
  c.c_plus = j.value("c_plus", 0.0);
  c.c_minus = j.value("c_minus", 0.0);
  c.c_cont = j.value("c_cont", 0.0);
  c.bump_center = j.value("bump_center", 5.0);
  c.bump_width = j.value("bump_width", 2.0);
  c.alpha_target = j.value("alpha_target", 0.0);
  c.alpha0 = j.value("alpha0", 1e-2);
  c.R0 = j.value("R0", 10.0);
  c.dt = j.value("dt", 1e-3);
  c.t_max = j.value("t_max", 20.0);
  c.obs_stride_t = j.value("obs_stride_t", 0.05);
  if (j.contains("sponge")) c.sponge = j.at("sponge").get<SpongeConfig>();
  c.guard_factor = j.value("guard_factor", 1e3);
}

inline json outcome_to_json(const RunOutcome& oc) {
  json j;
  j["classification"] = to_string(oc.cls);
  j["alpha"] = oc.alpha;
  j["alpha0"] = oc.alpha0;
  j["t_crit"] = oc.t_crit;
  j["t_exit"] = oc.t_exit;
  j["omega_at_crit"] = oc.omega_at_crit;
  j["e2"] = oc.e2;
  j["growth_rate"] = oc.growth_rate;
  j["growth_in_window"] = oc.growth_in_window;
  j["exit_bound"] = oc.exit_bound;
  j["exit_within_bound"] = oc.exit_within_bound;
  j["b_plus_at_exit"] = oc.b_plus_at_exit;
  j["decay_exponent"] = oc.decay_exponent;
  j["mu_half"] = oc.mu_half;
  j["tracker_lost"] = oc.tracker_lost;
  j["t_lost"] = oc.t_lost;
  j["detail"] = oc.detail;
  return j;
}

// ---------------------------------------------------------------------------
// Manifest: one per output directory.
// ---------------------------------------------------------------------------
inline void write_manifest(const std::filesystem::path& dir,
                           const std::string& command, const json& config,
                           const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
  json m;
  m["schema_version"] = kSchemaVersion;
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["config_hash"] = config_hash(config);
  m["created_utc"] = iso8601_utc_now();
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw IoError("cannot write manifest in " + dir.string());
  os << m.dump(2) << '\n';
}

inline std::filesystem::path ensure_out_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory " + dir);
  return p;
}

inline json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

} // namespace nlslab
