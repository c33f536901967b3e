#pragma once

// Discretized quadratic (co)variation functionals along refining
// subdivision sequences: S^n(X,Y), energy, pre-quadratic variation, the
// property-(S) probe, and discretized Stieltjes integrals against S^n.
//
// Summation convention: S^n(X,Y)_t sums over grid intervals whose LEFT
// endpoint is <= t, with the increment reaching the right endpoint. An
// increment straddling t is therefore included when t_i <= t. This is the
// convention used everywhere probes are taken at non-terminal times.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wdp/grid.hpp"
#include "wdp/mc.hpp"
#include "wdp/sample_path.hpp"

namespace wdp {

namespace detail {
// Indices of the level points inside the path grid; throws on mismatch.
inline std::vector<std::size_t> locate(const Subdivision& level, const Subdivision& fine) {
  std::vector<std::size_t> idx(level.size());
  const auto& lp = level.points();
  const auto& fp = fine.points();
  std::size_t k = 0;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    while (k < fp.size() && fp[k] < lp[i]) ++k;
    if (k == fp.size() || fp[k] != lp[i])
      throw std::invalid_argument("grid mismatch: level point " + std::to_string(lp[i]) +
                                  " is not on the path grid");
    idx[i] = k;
  }
  return idx;
}
}  // namespace detail

// S^n(X,Y)_t for one subdivision, at each probe time (probes sorted).
inline std::vector<double> covariation_at_probes(const SamplePath& X, const SamplePath& Y,
                                                 const Subdivision& level,
                                                 const std::vector<double>& probes) {
  const auto ix = detail::locate(level, X.grid());
  const auto iy = &X == &Y ? ix : detail::locate(level, Y.grid());
  for (double t : probes)
    if (t < 0.0 || t > level.horizon()) throw std::out_of_range("probe time outside [0,T]");
  std::vector<double> out(probes.size(), 0.0);
  const auto& xv = X.values();
  const auto& yv = Y.values();
  double running = 0.0;
  std::size_t p = 0;
  for (std::size_t i = 0; i + 1 < level.size(); ++i) {
    const double left = level[i];
    while (p < probes.size() && probes[p] < left) out[p++] = running;
    if (p == probes.size()) break;
    const double dx = xv[ix[i + 1]] - xv[ix[i]];
    const double dy = yv[iy[i + 1]] - yv[iy[i]];
    running += dx * dy;
  }
  while (p < probes.size()) out[p++] = running;
  return out;
}

inline double covariation_sum(const SamplePath& X, const SamplePath& Y, const Subdivision& level,
                              double t) {
  return covariation_at_probes(X, Y, level, {t}).front();
}

struct CovariationReport {
  std::vector<double> probe_times;
  // per level n: S^n(X,Y) at each probe time
  std::vector<std::pair<int, std::vector<double>>> per_level;
  // sum_{s<=t} dX_s dY_s from the ledgers, independent of n
  std::vector<double> jump_part;

  std::vector<double> continuous_part(std::size_t level_index) const {
    std::vector<double> out = per_level.at(level_index).second;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= jump_part[i];
    return out;
  }
};

inline CovariationReport covariation_sums(const SamplePath& X, const SamplePath& Y,
                                          const SubdivisionSequence& seq,
                                          std::vector<double> probes) {
  std::sort(probes.begin(), probes.end());
  CovariationReport rep;
  rep.probe_times = probes;
  for (const auto& [n, sub] : seq.levels())
    rep.per_level.emplace_back(n, covariation_at_probes(X, Y, *sub, probes));
  // Jump covariation: match ledger times exactly.
  rep.jump_part.assign(probes.size(), 0.0);
  std::size_t a = 0, b = 0;
  std::vector<std::pair<double, double>> common;  // (time, dX*dY)
  const auto& jx = X.jumps();
  const auto& jy = Y.jumps();
  while (a < jx.size() && b < jy.size()) {
    if (jx[a].t < jy[b].t) ++a;
    else if (jy[b].t < jx[a].t) ++b;
    else { common.emplace_back(jx[a].t, jx[a].dx * jy[b].dx); ++a; ++b; }
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    double s = 0.0;
    for (const auto& [t, v] : common)
      if (t <= probes[p]) s += v;
    rep.jump_part[p] = s;
  }
  return rep;
}

struct EnergyReport {
  std::vector<LevelRow> per_level;  // MC mean and SE of sum_{D_n} (dX)^2
  double running_sup = 0.0;         // max of per-level means seen so far
};

// Monte Carlo estimate of E[sum_{D_n}(dX)^2] per level, with the running
// sup across levels (a lower bound for the true sup over all n).
inline EnergyReport energy_estimate(const std::function<SamplePath(std::uint64_t)>& path_factory,
                                    const SubdivisionSequence& seq, std::size_t n_paths,
                                    unsigned workers = 0) {
  const std::size_t k = seq.count();
  std::vector<std::string> names(k);
  for (std::size_t c = 0; c < k; ++c)
    names[c] = "energy_level_" + std::to_string(seq.levels()[c].first);
  EnsembleConfig cfg{0, n_paths, workers};
  auto stats = run_ensemble(
      cfg,
      [&](std::uint64_t i) {
        const SamplePath X = path_factory(i);
        std::vector<double> row(k);
        for (std::size_t c = 0; c < k; ++c) {
          const double T = seq.levels()[c].second->horizon();
          row[c] = covariation_sum(X, X, *seq.levels()[c].second, T);
        }
        return row;
      },
      names);
  EnergyReport rep;
  for (std::size_t c = 0; c < k; ++c) {
    LevelRow row;
    row.level = seq.levels()[c].first;
    row.mesh = seq.levels()[c].second->mesh();
    row.mean = stats[c].mean;
    row.se = stats[c].se;
    rep.per_level.push_back(row);
    rep.running_sup = std::max(rep.running_sup, row.mean);
  }
  return rep;
}

// S^{pi ∩ [0,t]}(X,X): squared-increment sum over the subdivision restricted
// to [0,t] (both endpoints <= t; no straddling increment).
template <typename Eval>
double pre_qv(Eval&& x, const Subdivision& pi, double t) {
  double sum = 0.0;
  double prev = x(pi[0]);
  for (std::size_t i = 1; i < pi.size() && pi[i] <= t; ++i) {
    const double cur = x(pi[i]);
    const double d = cur - prev;
    sum += d * d;
    prev = cur;
  }
  return sum;
}

inline double pre_qv(const SamplePath& X, const Subdivision& pi, double t) {
  return pre_qv([&](double s) { return X.value_at(s); }, pi, t);
}

struct PropertySProbeRow {
  double mesh_target = 0.0;
  std::vector<double> values;  // S^{pi_t}(X,X) over the probe subdivisions
  double spread = 0.0;         // max - min
};

struct PropertySReport {
  double t = 0.0;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<PropertySProbeRow> rows;
};

// Property-(S) surrogate: for each mesh target, evaluate S^{pi_t}(X,X) over
// randomized subdivisions of [0,t] capped at that mesh, plus the two dyadic
// subdivisions bracketing it, and report the spread. A shrinking spread is
// evidence for property (S); a persistent spread refutes it.
template <typename Eval>
PropertySReport property_S_probe(Eval&& x, double t, const std::vector<double>& mesh_targets,
                                 std::size_t trials, std::uint64_t seed) {
  PropertySReport rep;
  rep.t = t;
  rep.seed = seed;
  rep.trials = trials;
  for (std::size_t m = 0; m < mesh_targets.size(); ++m) {
    const double mesh = mesh_targets[m];
    if (!(mesh > 0.0 && mesh <= t)) throw std::invalid_argument("bad mesh target");
    PropertySProbeRow row;
    row.mesh_target = mesh;
    // Dyadic anchors: the coarsest dyadic level with mesh <= target, and one
    // deeper (these have opposite parity, which matters for pathologies).
    const int lvl = static_cast<int>(std::ceil(std::log2(t / mesh)));
    for (int l : {lvl, lvl + 1}) {
      std::vector<double> pts;
      const std::size_t cnt = std::size_t{1} << l;
      for (std::size_t j = 0; j <= cnt; ++j) pts.push_back(t * std::ldexp(double(j), -l));
      row.values.push_back(pre_qv(x, Subdivision(std::move(pts)), t));
    }
    for (std::size_t trial = 0; trial < trials; ++trial) {
      RandomStream rs(derive_path_seed(seed, m * trials + trial));
      // Uniform random interior points, then any gap above the cap is split
      // evenly so every probe honors the mesh target.
      const std::size_t target_cnt = static_cast<std::size_t>(std::ceil(2.0 * t / mesh));
      std::vector<double> pts{0.0, t};
      for (std::size_t j = 0; j + 1 < target_cnt; ++j) pts.push_back(t * rs.uniform01());
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      std::vector<double> refined;
      for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        refined.push_back(pts[j]);
        const double gap = pts[j + 1] - pts[j];
        if (gap > mesh) {
          const int parts = static_cast<int>(std::ceil(gap / mesh));
          for (int q = 1; q < parts; ++q) refined.push_back(pts[j] + gap * q / parts);
        }
      }
      refined.push_back(t);
      row.values.push_back(pre_qv(x, Subdivision(std::move(refined)), t));
    }
    const auto [lo, hi] = std::minmax_element(row.values.begin(), row.values.end());
    row.spread = *hi - *lo;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// Discretization of int_0^t f(Z^n_{s-}) g(dU^n_s) dS^n(X,Y)_s per level:
//   sum f(Z_{t_i}) g(U_{t_{i+1}} - U_{t_i}) * (S^n increment over [t_i,t_{i+1}]).
inline std::vector<std::pair<int, double>> discrete_stieltjes(
    const std::function<double(double)>& f, const SamplePath& Z,
    const std::function<double(double)>& g, const SamplePath& U, const SamplePath& X,
    const SamplePath& Y, const SubdivisionSequence& seq, double t) {
  std::vector<std::pair<int, double>> out;
  for (const auto& [n, sub] : seq.levels()) {
    const auto ix = detail::locate(*sub, X.grid());
    const auto iy = detail::locate(*sub, Y.grid());
    const auto iz = detail::locate(*sub, Z.grid());
    const auto iu = detail::locate(*sub, U.grid());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < sub->size() && (*sub)[i] <= t; ++i) {
      const double ds = (X.values()[ix[i + 1]] - X.values()[ix[i]]) *
                        (Y.values()[iy[i + 1]] - Y.values()[iy[i]]);
      const double du = U.values()[iu[i + 1]] - U.values()[iu[i]];
      sum += f(Z.values()[iz[i]]) * g(du) * ds;
    }
    out.emplace_back(n, sum);
  }
  return out;
}

}  // namespace wdp
