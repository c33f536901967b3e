#pragma once

// Ensemble orchestration: run a pure per-path statistic over a reproducible
// ensemble and aggregate deterministically.
//
// Reduction contract: per-path values are stored by path index and reduced
// by fixed-order pairwise-tree summation, so serial and parallel runs agree
// bitwise for any worker count. Statistics must be pure functions of the
// path index (seeds derive from the master seed via derive_path_seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "wdp/rng.hpp"

namespace wdp {

inline unsigned default_workers() {
  if (const char* env = std::getenv("WDP_WORKERS")) {
    const long w = std::strtol(env, nullptr, 10);
    if (w >= 1) return static_cast<unsigned>(w);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Blocks of indices handed to plain threads; results must be written to
// per-index slots so the partition cannot affect the outcome.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (n == 0) return;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mx;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi]() {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mx);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Fixed-order pairwise-tree sum; the documented deterministic reduction.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

struct LevelRow {
  int level = 0;
  double mesh = 0.0;
  double mean = 0.0;
  double se = 0.0;
};

struct EnsembleStats {
  std::string name;
  std::size_t n_paths = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance
  double se = 0.0;        // sqrt(variance / n_paths)
  double band_lo = 0.0;   // central 95% band from empirical quantiles
  double band_hi = 0.0;
  std::vector<LevelRow> per_level;  // filled by level-sweeping callers
};

struct EnsembleConfig {
  std::uint64_t master_seed = 0;
  std::size_t n_paths = 0;
  unsigned workers = 0;  // 0 = default_workers()
};

namespace detail {
inline double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  const double pos = q * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * s[lo] + w * s[hi];
}

inline EnsembleStats summarize(std::string name, std::vector<double> values) {
  EnsembleStats st;
  st.name = std::move(name);
  st.n_paths = values.size();
  const double n = static_cast<double>(values.size());
  st.mean = pairwise_sum(values) / n;
  std::vector<double> dev2(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - st.mean;
    dev2[i] = d * d;
  }
  st.variance = values.size() > 1 ? pairwise_sum(dev2) / (n - 1.0) : 0.0;
  st.se = std::sqrt(st.variance / n);
  std::sort(values.begin(), values.end());
  st.band_lo = quantile_sorted(values, 0.025);
  st.band_hi = quantile_sorted(values, 0.975);
  return st;
}
}  // namespace detail

// Evaluate a vector-valued per-path statistic on paths 0..n_paths-1 and
// aggregate each component. Any per-path failure aborts the run with the
// offending index attached.
inline std::vector<EnsembleStats> run_ensemble(
    const EnsembleConfig& cfg,
    const std::function<std::vector<double>(std::uint64_t)>& per_path,
    const std::vector<std::string>& names) {
  if (cfg.n_paths == 0) throw std::invalid_argument("run_ensemble: n_paths must be positive");
  const std::size_t k = names.size();
  std::vector<double> table(cfg.n_paths * k);
  const unsigned workers = cfg.workers ? cfg.workers : default_workers();
  parallel_for(cfg.n_paths, workers, [&](std::size_t i) {
    std::vector<double> row;
    try {
      row = per_path(static_cast<std::uint64_t>(i));
    } catch (const std::exception& e) {
      throw std::runtime_error("path " + std::to_string(i) + " failed: " + e.what());
    }
    if (row.size() != k)
      throw std::runtime_error("path " + std::to_string(i) + " returned wrong statistic count");
    for (std::size_t c = 0; c < k; ++c) table[c * cfg.n_paths + i] = row[c];
  });
  std::vector<EnsembleStats> out;
  out.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> col(table.begin() + static_cast<std::ptrdiff_t>(c * cfg.n_paths),
                            table.begin() + static_cast<std::ptrdiff_t>((c + 1) * cfg.n_paths));
    out.push_back(detail::summarize(names[c], std::move(col)));
  }
  return out;
}

inline EnsembleStats run_ensemble_scalar(const EnsembleConfig& cfg,
                                         const std::function<double(std::uint64_t)>& per_path,
                                         const std::string& name) {
  auto v = run_ensemble(
      cfg, [&](std::uint64_t i) { return std::vector<double>{per_path(i)}; }, {name});
  return v.front();
}

enum class TrendVerdict { Decreasing, Flat, Increasing, Inconclusive };

inline const char* to_string(TrendVerdict v) {
  switch (v) {
    case TrendVerdict::Decreasing: return "decreasing";
    case TrendVerdict::Flat: return "flat";
    case TrendVerdict::Increasing: return "increasing";
    case TrendVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct ConvergenceReport {
  std::vector<LevelRow> rows;
  double slope = 0.0;  // log|mean| against log mesh, least squares
  TrendVerdict verdict = TrendVerdict::Inconclusive;
};

// Per-level means with a monotone-trend verdict under an MC-error allowance
// of `se_mult` standard errors, and a fitted log-log slope against mesh.
inline ConvergenceReport convergence_table(std::vector<LevelRow> rows, double se_mult = 3.0) {
  if (rows.size() < 3) throw std::invalid_argument("convergence_table needs at least 3 levels");
  ConvergenceReport rep;
  rep.rows = std::move(rows);
  const auto& r = rep.rows;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(r.size());
  for (const auto& row : r) {
    const double x = std::log(row.mesh);
    const double y = std::log(std::max(std::abs(row.mean), 1e-300));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  rep.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;

  bool noninc = true, nondec = true;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double tol = se_mult * (r[i - 1].se + r[i].se);
    if (std::abs(r[i].mean) > std::abs(r[i - 1].mean) + tol) noninc = false;
    if (std::abs(r[i].mean) < std::abs(r[i - 1].mean) - tol) nondec = false;
  }
  const double net_tol = se_mult * (r.front().se + r.back().se);
  const double net = std::abs(r.back().mean) - std::abs(r.front().mean);
  if (noninc && net < -net_tol)
    rep.verdict = TrendVerdict::Decreasing;
  else if (nondec && net > net_tol)
    rep.verdict = TrendVerdict::Increasing;
  else if (noninc && nondec)
    rep.verdict = TrendVerdict::Flat;
  else
    rep.verdict = TrendVerdict::Inconclusive;
  return rep;
}

// Everything needed to replay a run.
struct RunManifest {
  std::uint64_t master_seed = 0;
  std::string driver;
  std::string kernel;
  std::vector<std::pair<std::string, double>> driver_params;
  std::vector<std::pair<std::string, double>> kernel_params;
  std::vector<int> levels;
  std::size_t n_paths = 0;
  std::string tool_version;
  std::vector<std::pair<std::string, std::uint64_t>> frozen_fingerprints;
};

// FNV-1a over the raw value bits; used to fingerprint frozen trajectories.
inline std::uint64_t fingerprint(const std::vector<double>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double d : values) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace wdp
