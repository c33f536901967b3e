#pragma once

// Finite subdivisions of [0,T] and refining subdivision sequences.
//
// Dyadic grid points are constructed canonically as T * ldexp(j, -n), which
// is exact in binary floating point for every level reachable under the
// memory cap. Set-inclusion tests between levels therefore compare exactly;
// no tolerances are involved anywhere in this module.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace wdp {

// Hard cap on subdivision sizes; dyadic level 24 is 2^24 + 1 points.
inline constexpr std::size_t kDefaultPointCap = (std::size_t{1} << 24) + 1;

inline double dyadic_time(std::int64_t j, int level, double T = 1.0) {
  return T * std::ldexp(static_cast<double>(j), -level);
}

class Subdivision {
 public:
  explicit Subdivision(std::vector<double> points) : pts_(std::move(points)) {
    if (pts_.size() < 2) throw std::invalid_argument("subdivision needs at least {0, T}");
    if (pts_.front() != 0.0) throw std::invalid_argument("subdivision must start at 0");
    mesh_ = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      const double gap = pts_[i] - pts_[i - 1];
      if (!(gap > 0.0)) throw std::invalid_argument("subdivision points must be strictly increasing");
      mesh_ = std::max(mesh_, gap);
    }
  }

  static Subdivision dyadic(double T, int level, std::size_t point_cap = kDefaultPointCap) {
    if (level < 0 || level > 62) throw std::invalid_argument("dyadic level out of range");
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    const std::size_t n = (std::size_t{1} << level) + 1;
    if (n > point_cap) throw std::length_error("dyadic level exceeds the configured point cap");
    std::vector<double> pts(n);
    for (std::size_t j = 0; j < n; ++j) pts[j] = dyadic_time(static_cast<std::int64_t>(j), level, T);
    return Subdivision(std::move(pts));
  }

  const std::vector<double>& points() const { return pts_; }
  double operator[](std::size_t i) const { return pts_[i]; }
  std::size_t size() const { return pts_.size(); }
  std::size_t intervals() const { return pts_.size() - 1; }
  double mesh() const { return mesh_; }
  double horizon() const { return pts_.back(); }

  // Largest grid point <= t.
  double rho(double t) const {
    return pts_[rho_index(t)];
  }

  std::size_t rho_index(double t) const {
    if (t < 0.0 || t > horizon()) throw std::out_of_range("rho: t outside [0,T]");
    auto it = std::upper_bound(pts_.begin(), pts_.end(), t);
    return static_cast<std::size_t>((it - pts_.begin()) - 1);
  }

  bool contains(double t) const {
    return std::binary_search(pts_.begin(), pts_.end(), t);
  }

  // Exact index of a grid point; throws if t is not on the grid.
  std::size_t index_of(double t) const {
    auto it = std::lower_bound(pts_.begin(), pts_.end(), t);
    if (it == pts_.end() || *it != t)
      throw std::invalid_argument("time " + std::to_string(t) + " is not a grid point");
    return static_cast<std::size_t>(it - pts_.begin());
  }

  // Exact set inclusion (this subset of finer).
  bool subset_of(const Subdivision& finer) const {
    std::size_t k = 0;
    for (double p : pts_) {
      while (k < finer.pts_.size() && finer.pts_[k] < p) ++k;
      if (k == finer.pts_.size() || finer.pts_[k] != p) return false;
    }
    return true;
  }

 private:
  std::vector<double> pts_;
  double mesh_ = 0.0;
};

using SubdivisionPtr = std::shared_ptr<const Subdivision>;

class SubdivisionSequence {
 public:
  SubdivisionSequence(std::vector<std::pair<int, SubdivisionPtr>> levels, bool refining)
      : levels_(std::move(levels)), refining_(refining) {
    if (levels_.empty()) throw std::invalid_argument("subdivision sequence is empty");
    for (std::size_t i = 1; i < levels_.size(); ++i) {
      if (levels_[i].first <= levels_[i - 1].first)
        throw std::invalid_argument("levels must be strictly increasing");
      if (levels_[i].second->mesh() > levels_[i - 1].second->mesh())
        throw std::invalid_argument("mesh must be nonincreasing across levels");
      if (refining_ && !levels_[i - 1].second->subset_of(*levels_[i].second))
        throw std::invalid_argument("refining sequence violates set inclusion");
    }
  }

  static SubdivisionSequence dyadic(double T, int n_max, std::size_t point_cap = kDefaultPointCap) {
    return dyadic_range(T, 1, n_max, point_cap);
  }

  static SubdivisionSequence dyadic_range(double T, int n_lo, int n_hi,
                                          std::size_t point_cap = kDefaultPointCap) {
    if (n_lo < 1 || n_hi < n_lo) throw std::invalid_argument("bad dyadic level range");
    std::vector<std::pair<int, SubdivisionPtr>> lv;
    for (int n = n_lo; n <= n_hi; ++n)
      lv.emplace_back(n, std::make_shared<Subdivision>(Subdivision::dyadic(T, n, point_cap)));
    return SubdivisionSequence(std::move(lv), /*refining=*/true);
  }

  const std::vector<std::pair<int, SubdivisionPtr>>& levels() const { return levels_; }
  std::size_t count() const { return levels_.size(); }
  bool refining() const { return refining_; }
  const Subdivision& at_level(int n) const {
    for (const auto& [lvl, sub] : levels_)
      if (lvl == n) return *sub;
    throw std::invalid_argument("level not present in sequence");
  }
  const Subdivision& deepest() const { return *levels_.back().second; }

 private:
  std::vector<std::pair<int, SubdivisionPtr>> levels_;
  bool refining_;
};

// Finite truncation of the appendix subdivision
//   pi_n = { j 2^{-2n} : j <= 2^{2n}-1 } u { 1 - 2^{-2k} : n <= k <= depth_cap } u {1}.
// The head and the tail overlap at 1 - 2^{-2n}; duplicates are removed.
inline Subdivision pathological_pi(int n, int depth_cap) {
  if (n < 1) throw std::invalid_argument("pathological_pi: n must be >= 1");
  if (depth_cap < n) throw std::invalid_argument("pathological_pi: depth_cap must be >= n");
  // 1 - 2^{-2k} stops being a distinct double once 2k exceeds the mantissa.
  if (2 * depth_cap > 52)
    throw std::invalid_argument("pathological_pi: depth_cap exceeds representable resolution");
  if (2 * n > 40) throw std::length_error("pathological_pi: head exceeds the point cap");
  std::vector<double> pts;
  const std::int64_t head = std::int64_t{1} << (2 * n);
  pts.reserve(static_cast<std::size_t>(head) + static_cast<std::size_t>(depth_cap - n) + 2);
  for (std::int64_t j = 0; j < head; ++j) pts.push_back(dyadic_time(j, 2 * n));
  for (int k = n; k <= depth_cap; ++k) pts.push_back(1.0 - std::ldexp(1.0, -2 * k));
  pts.push_back(1.0);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return Subdivision(std::move(pts));
}

}  // namespace wdp
