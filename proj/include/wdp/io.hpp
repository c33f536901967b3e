#pragma once

// File formats: CSV paths and reports, JSON sidecars and manifests,
// two-column plot data. Doubles are printed with max_digits10 so outputs
// round-trip bitwise and reruns from a manifest compare byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wdp/convolution.hpp"
#include "wdp/mc.hpp"
#include "wdp/sample_path.hpp"

namespace wdp::io {

using nlohmann::json;

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
}

inline std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// --- CSV -------------------------------------------------------------------

inline void write_subdivision_csv(const Subdivision& sub, const std::filesystem::path& file) {
  std::string s = "t\n";
  for (double t : sub.points()) s += fmt(t) + "\n";
  write_text(file, s);
}

inline void write_path_csv(const SamplePath& path, const std::filesystem::path& file) {
  std::string s = "t,value\n";
  for (std::size_t i = 0; i < path.grid().size(); ++i)
    s += fmt(path.grid()[i]) + "," + fmt(path.value_at_index(i)) + "\n";
  write_text(file, s);
}

inline void write_jump_ledger_json(const SamplePath& path, const std::filesystem::path& file) {
  json arr = json::array();
  for (const Jump& j : path.jumps()) arr.push_back({{"t", j.t}, {"dx", j.dx}});
  write_text(file, arr.dump(2) + "\n");
}

inline void write_decomposition_csv(const SamplePath& M, const SamplePath& A,
                                    const std::filesystem::path& file) {
  std::string s = "t,M,A\n";
  for (std::size_t i = 0; i < M.grid().size(); ++i)
    s += fmt(M.grid()[i]) + "," + fmt(M.value_at_index(i)) + "," + fmt(A.value_at_index(i)) + "\n";
  write_text(file, s);
}

struct ReportRow {
  int level = 0;
  double probe_t = 0.0;
  double value = 0.0;
  double se = 0.0;
};

inline void write_report_csv(const std::vector<ReportRow>& rows,
                             const std::filesystem::path& file) {
  std::string s = "level,probe_t,value,se\n";
  for (const auto& r : rows)
    s += std::to_string(r.level) + "," + fmt(r.probe_t) + "," + fmt(r.value) + "," + fmt(r.se) + "\n";
  write_text(file, s);
}

// Whitespace-separated two-column plot data with a comment header.
inline void write_plot_data(const std::string& statistic, const std::vector<double>& x,
                            const std::vector<double>& y, const std::filesystem::path& file) {
  if (x.size() != y.size()) throw std::invalid_argument("plot data: x/y size mismatch");
  std::string s = "# " + statistic + "\n";
  for (std::size_t i = 0; i < x.size(); ++i) s += fmt(x[i]) + " " + fmt(y[i]) + "\n";
  write_text(file, s);
}

// Tabulated kernel matrix: first row "G,s0,s1,..."; each later row starts
// with its t value followed by G(t, s_j).
inline TabulatedKernel read_tabulated_kernel_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open kernel matrix " + file.string());
  TabulatedKernel k;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty kernel matrix");
  {
    std::size_t pos = line.find(',');
    if (pos == std::string::npos || line.substr(0, pos) != "G")
      throw std::runtime_error("kernel matrix header must start with 'G'");
    while (pos != std::string::npos) {
      const std::size_t next = line.find(',', pos + 1);
      k.s_grid.push_back(std::stod(line.substr(pos + 1, next - pos - 1)));
      pos = next;
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t pos = line.find(',');
    k.t_grid.push_back(std::stod(line.substr(0, pos)));
    while (pos != std::string::npos) {
      const std::size_t next = line.find(',', pos + 1);
      k.values.push_back(std::stod(line.substr(pos + 1, next - pos - 1)));
      pos = next;
    }
  }
  if (k.values.size() != k.t_grid.size() * k.s_grid.size())
    throw std::runtime_error("kernel matrix is ragged");
  return k;
}

// --- manifest ----------------------------------------------------------------

inline json manifest_to_json(const RunManifest& m) {
  json j;
  j["master_seed"] = m.master_seed;
  j["driver"] = m.driver;
  j["kernel"] = m.kernel;
  json dp = json::object(), kp = json::object();
  for (const auto& [name, v] : m.driver_params) dp[name] = v;
  for (const auto& [name, v] : m.kernel_params) kp[name] = v;
  j["driver_params"] = dp;
  j["kernel_params"] = kp;
  j["levels"] = m.levels;
  j["n_paths"] = m.n_paths;
  j["tool_version"] = m.tool_version;
  json fp = json::object();
  for (const auto& [name, hash] : m.frozen_fingerprints) fp[name] = hash;
  j["frozen_fingerprints"] = fp;
  return j;
}

inline void write_manifest(const RunManifest& m, const std::filesystem::path& file) {
  write_text(file, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace wdp::io
