#pragma once

// Sampled paths with jump ledgers, and the built-in square-integrable
// martingale drivers (Brownian motion, compensated Poisson, frozen
// trajectories). Paths are immutable value types; ensembles share grids
// through shared_ptr and parallelize over the path index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wdp/grid.hpp"
#include "wdp/rng.hpp"

namespace wdp {

struct Jump {
  double t;
  double dx;
};

// A path observed on a finite grid. The value stored at a jump time is the
// post-jump (right) value; the ledger carries the jump sizes.
class SamplePath {
 public:
  SamplePath(SubdivisionPtr grid, std::vector<double> values, std::vector<Jump> jumps = {})
      : grid_(std::move(grid)), values_(std::move(values)), jumps_(std::move(jumps)) {
    if (!grid_) throw std::invalid_argument("SamplePath: null grid");
    if (values_.size() != grid_->size())
      throw std::invalid_argument("SamplePath: values/grid size mismatch");
    if (values_.front() != 0.0) throw std::invalid_argument("SamplePath: value at 0 must be 0");
    double prev = -1.0;
    for (const Jump& j : jumps_) {
      if (!(j.t > prev)) throw std::invalid_argument("SamplePath: jump times must be increasing");
      if (!grid_->contains(j.t)) throw std::invalid_argument("SamplePath: jump time off the grid");
      prev = j.t;
    }
  }

  const Subdivision& grid() const { return *grid_; }
  SubdivisionPtr grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  double horizon() const { return grid_->horizon(); }

  double value_at_index(std::size_t i) const { return values_[i]; }
  double value_at(double t) const { return values_[grid_->index_of(t)]; }

  // Jump size at t (0 if t is not a ledger time).
  double jump_at(double t) const {
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                               [](const Jump& j, double x) { return j.t < x; });
    return (it != jumps_.end() && it->t == t) ? it->dx : 0.0;
  }

  // Left limit at a grid time, reconstructed from the ledger.
  double pre_value_at(double t) const { return value_at(t) - jump_at(t); }

  // Restriction to a coarser grid. Exact when `sub` is a subset of the grid;
  // otherwise linear interpolation is applied and the result is flagged.
  SamplePath restrict_to(SubdivisionPtr sub) const {
    std::vector<double> v(sub->size());
    bool interpolated = false;
    for (std::size_t i = 0; i < sub->size(); ++i) {
      const double t = (*sub)[i];
      auto& pts = grid_->points();
      auto it = std::lower_bound(pts.begin(), pts.end(), t);
      if (it != pts.end() && *it == t) {
        v[i] = values_[static_cast<std::size_t>(it - pts.begin())];
      } else {
        if (it == pts.begin() || it == pts.end())
          throw std::out_of_range("restrict_to: time outside source grid");
        const std::size_t hi = static_cast<std::size_t>(it - pts.begin());
        const double w = (t - pts[hi - 1]) / (pts[hi] - pts[hi - 1]);
        v[i] = (1.0 - w) * values_[hi - 1] + w * values_[hi];
        interpolated = true;
      }
    }
    std::vector<Jump> kept;
    for (const Jump& j : jumps_)
      if (sub->contains(j.t)) kept.push_back(j);
    SamplePath out(std::move(sub), std::move(v), std::move(kept));
    out.interpolated_ = interpolated;
    out.snap_warning_ = snap_warning_;
    return out;
  }

  bool snap_warning() const { return snap_warning_; }
  bool interpolated() const { return interpolated_; }
  void set_snap_warning(bool b) { snap_warning_ = b; }

 private:
  SubdivisionPtr grid_;
  std::vector<double> values_;
  std::vector<Jump> jumps_;
  bool snap_warning_ = false;
  bool interpolated_ = false;
};

enum class DriverKind { BrownianMotion, CompensatedPoisson, FrozenTrajectory };

struct DriverSpec {
  DriverKind kind = DriverKind::BrownianMotion;
  double lambda = 1.0;  // CompensatedPoisson intensity
  std::uint64_t seed = 0;
  std::shared_ptr<const SamplePath> frozen;  // FrozenTrajectory reference

  static DriverSpec brownian(std::uint64_t seed) { return {DriverKind::BrownianMotion, 1.0, seed, nullptr}; }
  static DriverSpec compensated_poisson(double lambda, std::uint64_t seed) {
    if (!(lambda > 0.0)) throw std::invalid_argument("CompensatedPoisson needs lambda > 0");
    return {DriverKind::CompensatedPoisson, lambda, seed, nullptr};
  }
  static DriverSpec frozen_trajectory(std::shared_ptr<const SamplePath> path) {
    return {DriverKind::FrozenTrajectory, 1.0, 0, std::move(path)};
  }
};

// Analytic Levy system of a built-in driver. For the compensated Poisson
// driver nu(ds,dx) = lambda ds x delta_1(dx); for Brownian motion it is the
// zero measure.
struct JumpCompensator {
  enum class Kind { Zero, PoissonUnit };
  Kind kind = Kind::Zero;
  double lambda = 0.0;

  // int_0^T int x^2 nu(ds,dx); equals lambda*T for the Poisson driver.
  double x2_integral(double T) const { return kind == Kind::PoissonUnit ? lambda * T : 0.0; }
};

inline JumpCompensator compensator_for(const DriverSpec& spec) {
  if (spec.kind == DriverKind::CompensatedPoisson)
    return {JumpCompensator::Kind::PoissonUnit, spec.lambda};
  return {JumpCompensator::Kind::Zero, 0.0};
}

// Simulate one driver path on the given grid. Pure function of (spec, grid).
inline SamplePath simulate_driver(const DriverSpec& spec, SubdivisionPtr grid) {
  const Subdivision& g = *grid;
  const std::size_t n = g.size();
  switch (spec.kind) {
    case DriverKind::BrownianMotion: {
      RandomStream rs(spec.seed);
      std::vector<double> v(n, 0.0);
      for (std::size_t i = 1; i < n; ++i)
        v[i] = v[i - 1] + std::sqrt(g[i] - g[i - 1]) * rs.gaussian();
      return SamplePath(std::move(grid), std::move(v));
    }
    case DriverKind::CompensatedPoisson: {
      RandomStream rs(spec.seed);
      const double T = g.horizon();
      // Jump times from exponential spacings, snapped to the nearest grid
      // point (never 0, which would break the null-at-0 convention).
      std::vector<double> snapped;
      double t = rs.exponential(spec.lambda);
      while (t <= T) {
        std::size_t i = g.rho_index(t);
        if (i + 1 < n && (g[i + 1] - t) < (t - g[i])) ++i;
        if (i == 0) i = 1;
        snapped.push_back(g[i]);
        t += rs.exponential(spec.lambda);
      }
      std::vector<Jump> ledger;
      for (double s : snapped) {
        if (!ledger.empty() && ledger.back().t == s)
          ledger.back().dx += 1.0;
        else
          ledger.push_back({s, 1.0});
      }
      std::vector<double> v(n, 0.0);
      std::size_t k = 0;
      double count = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        while (k < ledger.size() && ledger[k].t <= g[i]) count += ledger[k++].dx;
        v[i] = count - spec.lambda * g[i];
      }
      SamplePath out(std::move(grid), std::move(v), std::move(ledger));
      // A grid coarser than the mean inter-jump spacing distorts snapping.
      if (g.mesh() > 1.0 / spec.lambda) out.set_snap_warning(true);
      return out;
    }
    case DriverKind::FrozenTrajectory: {
      if (!spec.frozen) throw std::invalid_argument("FrozenTrajectory driver without a path");
      return spec.frozen->restrict_to(std::move(grid));
    }
  }
  throw std::logic_error("unreachable driver kind");
}

// One Brownian trajectory at dyadic resolution on [0,1], frozen by seed.
// Deterministic: the same (seed, resolution) always yields the same path.
inline SamplePath frozen_beta(std::uint64_t seed, int resolution) {
  auto grid = std::make_shared<Subdivision>(Subdivision::dyadic(1.0, resolution));
  return simulate_driver(DriverSpec::brownian(seed), std::move(grid));
}

// Split off the running sum of jumps larger than a:
//   X_hat = sum_{s<=.} dX_s 1_{|dX_s| > a},   remainder = X - X_hat.
inline std::pair<SamplePath, SamplePath> truncate_large_jumps(const SamplePath& X, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("truncate_large_jumps: a must be > 0");
  const auto& g = X.grid();
  std::vector<double> hat(g.size(), 0.0), rem(g.size(), 0.0);
  std::vector<Jump> big, small;
  for (const Jump& j : X.jumps())
    (std::abs(j.dx) > a ? big : small).push_back(j);
  std::size_t k = 0;
  double running = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    while (k < big.size() && big[k].t <= g[i]) running += big[k++].dx;
    hat[i] = running;
    rem[i] = X.value_at_index(i) - running;
  }
  SamplePath Xhat(X.grid_ptr(), std::move(hat), std::move(big));
  SamplePath remainder(X.grid_ptr(), std::move(rem), std::move(small));
  return {std::move(Xhat), std::move(remainder)};
}

}  // namespace wdp
