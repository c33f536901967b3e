#pragma once

// Constructive counterexamples: the alternating-QV function (finite energy,
// no quadratic variation along the dyadics), the sawtooth family with
// discontinuous pre-quadratic variation, and the continuous-in-probability
// process without a cadlag modification.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "wdp/grid.hpp"
#include "wdp/mc.hpp"
#include "wdp/rng.hpp"
#include "wdp/sample_path.hpp"

namespace wdp {

inline constexpr double kSqrt3 = 1.7320508075688772935;

// Values on the dyadic grid D_depth built so that the squared-increment sum
// S_k along D_k alternates: 2 for odd k, 1 for even k >= 2.
//
// Construction: x_0 = x_1 = 0, x_{1/2} = 1. Even steps insert midpoints
// (halving each squared increment); odd steps insert, between neighbours
// (a, b), the root y = ((1+sqrt3) a + (1-sqrt3) b) / 2 of
//   (a-y)^2 + (b-y)^2 = 2 (a-b)^2
// (doubling each squared increment). Both roots work; this one is fixed so
// the construction is reproducible.
struct AlternatingQVFunction {
  int depth = 0;
  std::vector<double> values;  // 2^depth + 1 entries on D_depth

  // Piecewise-linear extension of the dyadic table.
  double eval(double t) const {
    if (t < 0.0 || t > 1.0) throw std::out_of_range("alternating function is defined on [0,1]");
    const double u = std::ldexp(t, depth);
    const auto i = static_cast<std::size_t>(u);
    if (i + 1 >= values.size()) return values.back();
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * values[i] + w * values[i + 1];
  }

  // S_k along D_k for k = 1..depth.
  std::vector<double> sk_table() const {
    std::vector<double> out;
    for (int k = 1; k <= depth; ++k) {
      const std::size_t stride = std::size_t{1} << (depth - k);
      std::vector<double> sq;
      sq.reserve(std::size_t{1} << k);
      for (std::size_t i = 0; i + stride < values.size(); i += stride) {
        const double d = values[i + stride] - values[i];
        sq.push_back(d * d);
      }
      out.push_back(pairwise_sum(sq));
    }
    return out;
  }

  // Largest |x_{(i+1)/2^n} - x_{i/2^n}| at rank n <= depth.
  double max_increment(int n) const {
    const std::size_t stride = std::size_t{1} << (depth - n);
    double m = 0.0;
    for (std::size_t i = 0; i + stride < values.size(); i += stride)
      m = std::max(m, std::abs(values[i + stride] - values[i]));
    return m;
  }

  // Neighbour bound at rank n: ((1+sqrt3)/4)^k for n in {2k, 2k+1}. The
  // bound is attained with equality at odd ranks.
  static double neighbour_bound(int n) {
    return std::pow((1.0 + kSqrt3) / 4.0, static_cast<double>(n / 2));
  }
};

inline AlternatingQVFunction build_alternating(int depth) {
  if (depth < 3) throw std::invalid_argument("build_alternating: depth must be >= 3");
  if (depth > 26) throw std::length_error("build_alternating: depth exceeds the point cap");
  AlternatingQVFunction fn;
  fn.depth = depth;
  fn.values.assign((std::size_t{1} << depth) + 1, 0.0);
  const std::size_t full = std::size_t{1} << depth;
  fn.values[full / 2] = 1.0;  // rank 1: {0, 1, 0}, S_1 = 2
  for (int m = 2; m <= depth; ++m) {
    const std::size_t stride = std::size_t{1} << (depth - m);
    const bool even_rank = (m % 2) == 0;
    for (std::size_t i = stride; i < full; i += 2 * stride) {
      const double a = fn.values[i - stride];
      const double b = fn.values[i + stride];
      fn.values[i] = even_rank ? 0.5 * (a + b) : 0.5 * ((1.0 + kSqrt3) * a + (1.0 - kSqrt3) * b);
    }
  }
  return fn;
}

enum class SawtoothVariant { Sqrt, Linear, Unit };

// Piecewise-affine sawtooth on [0,1]: zero at each t = 1 - 2^{1-2p}, peak
// value h_p at t = 1 - 2^{-2p} (h_p = 1/sqrt(p), 1/p, or 1 by variant),
// affine between, and 0 at t = 1. Teeth whose breakpoints fall below
// floating-point resolution of 1 are dropped.
class Sawtooth {
 public:
  explicit Sawtooth(SawtoothVariant variant) : variant_(variant) {}

  double operator()(double t) const {
    if (t < 0.0 || t > 1.0) throw std::out_of_range("sawtooth is defined on [0,1]");
    if (t <= 0.5 || 1.0 - t < 0x1.0p-50) return 0.0;
    int p = static_cast<int>(std::floor((1.0 - std::log2(1.0 - t)) / 2.0));
    while (p > 1 && t < zero(p)) --p;
    while (t >= zero(p + 1)) ++p;
    const double zp = zero(p), mp = peak_time(p), zn = zero(p + 1);
    if (t <= mp) return height(p) * (t - zp) / (mp - zp);
    return height(p) * (zn - t) / (zn - mp);
  }

  double height(int p) const {
    switch (variant_) {
      case SawtoothVariant::Sqrt: return 1.0 / std::sqrt(static_cast<double>(p));
      case SawtoothVariant::Linear: return 1.0 / static_cast<double>(p);
      case SawtoothVariant::Unit: return 1.0;
    }
    return 0.0;
  }
  static double zero(int p) { return 1.0 - std::ldexp(1.0, 1 - 2 * p); }
  static double peak_time(int p) { return 1.0 - std::ldexp(1.0, -2 * p); }
  SawtoothVariant variant() const { return variant_; }

 private:
  SawtoothVariant variant_;
};

inline Sawtooth sawtooth(SawtoothVariant variant) { return Sawtooth(variant); }

// The shifted process Y_t = X_{t-T} 1_{t>=T} on [0,2], with X the unit-peak
// sawtooth (0 outside [0,1)) and T uniform on [0,1] drawn from the seed.
// Continuous in probability, yet almost every path oscillates wildly just
// before time 1 + T.
struct NoCadlagProcess {
  double shift = 0.0;  // the realized T

  double eval(double t) const {
    const double u = t - shift;
    if (u < 0.0 || u >= 1.0) return 0.0;
    static const Sawtooth unit(SawtoothVariant::Unit);
    return unit(u);
  }
};

inline NoCadlagProcess no_cadlag_process(std::uint64_t seed) {
  RandomStream rs(seed);
  NoCadlagProcess y;
  y.shift = rs.uniform01();
  return y;
}

inline SamplePath no_cadlag_path(std::uint64_t seed, SubdivisionPtr grid) {
  const NoCadlagProcess y = no_cadlag_process(seed);
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) v[i] = y.eval((*grid)[i]);
  return SamplePath(std::move(grid), std::move(v));
}

}  // namespace wdp
