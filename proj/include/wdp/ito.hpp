#pragma once

// Transformation decompositions F(X) = F(0) + Y + Gamma for weak Dirichlet
// X = M + A: the explicit C^2 formulas, the C^1 bookkeeping definition of
// Gamma, and the quadratic-variation identity for F(X).
//
// All grid sums here use complete increments (right endpoint <= t), so the
// bookkeeping reconstruction F(X_{rho(t)}) = F(0) + Y_t + Gamma_t is exact.
// Jump sums always read the full ledger of X at its native resolution, with
// X_{s-} recovered exactly as X_s minus the ledger size.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wdp/decompose.hpp"
#include "wdp/estimators.hpp"
#include "wdp/grid.hpp"
#include "wdp/sample_path.hpp"

namespace wdp {

enum class Smoothness { C1, C2 };

struct TransformSpec {
  std::string name;
  std::function<double(double)> F;
  std::function<double(double)> f;           // F'
  std::function<double(double)> fprime;      // F'', required for C2
  Smoothness smoothness = Smoothness::C2;
  bool bounded_f = true;       // user attestation, spot-checked on path range only
  bool bounded_fprime = true;
};

// Finite-difference spot check of f against F (and f' against f when C2) on
// a probe grid; returns the worst relative error.
inline double validate_transform(const TransformSpec& tf, double lo, double hi,
                                 int probes = 33) {
  double worst = 0.0;
  const double h = (hi - lo) * 1e-6 + 1e-9;
  for (int i = 0; i < probes; ++i) {
    const double x = lo + (hi - lo) * i / (probes - 1);
    const double df = (tf.F(x + h) - tf.F(x - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(df - tf.f(x)) / (1.0 + std::abs(tf.f(x))));
    if (tf.smoothness == Smoothness::C2) {
      if (!tf.fprime) throw std::invalid_argument("C2 transform without second derivative");
      const double d2 = (tf.f(x + h) - tf.f(x - h)) / (2.0 * h);
      worst = std::max(worst, std::abs(d2 - tf.fprime(x)) / (1.0 + std::abs(tf.fprime(x))));
    }
  }
  return worst;
}

namespace detail {
// Compensator integrand F(x+1) - F(x) - f(x) for the unit-jump driver.
inline double poisson_bracket(const TransformSpec& tf, double x) {
  return tf.F(x + 1.0) - tf.F(x) - tf.f(x);
}
}  // namespace detail

// Martingale part of F(X):
//   Y_t = int_0^t f(X_{s-}) dM_s
//         + int_0^t int (F(X_{s-}+x) - F(X_{s-}) - x f(X_{s-})) (mu - nu)(ds,dx),
// discretized on `level` (a subset of the decomposition grid). The mu sum
// runs over the ledger of X; the nu integral is evaluated analytically per
// driver (zero for Brownian, lambda times a grid sum for unit Poisson).
inline SamplePath martingale_part_Y(const Decomposition& d, const TransformSpec& tf,
                                    const JumpCompensator& nu, SubdivisionPtr level) {
  if (!d.X.jumps().empty() && nu.kind == JumpCompensator::Kind::Zero)
    throw std::invalid_argument("martingale_part_Y: X carries jumps but nu is the zero measure");
  const Subdivision& g = *level;
  const auto ix = wdp::detail::locate(g, d.X.grid());
  const auto im = wdp::detail::locate(g, d.M.grid());
  const auto& xv = d.X.values();
  const auto& mv = d.M.values();
  const auto& jumps = d.X.jumps();
  std::vector<double> y(g.size(), 0.0);
  std::size_t jk = 0;
  double jump_sum = 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double xl = xv[ix[i - 1]];
    acc += tf.f(xl) * (mv[im[i]] - mv[im[i - 1]]);
    if (nu.kind == JumpCompensator::Kind::PoissonUnit)
      acc -= nu.lambda * detail::poisson_bracket(tf, xl) * (g[i] - g[i - 1]);
    while (jk < jumps.size() && jumps[jk].t <= g[i]) {
      const double xs = d.X.value_at(jumps[jk].t);
      const double pre = xs - jumps[jk].dx;
      jump_sum += tf.F(xs) - tf.F(pre) - jumps[jk].dx * tf.f(pre);
      ++jk;
    }
    y[i] = acc + jump_sum;
  }
  return SamplePath(std::move(level), std::move(y));
}

struct GammaResult {
  SamplePath gamma;              // term-by-term C^2 formula
  SamplePath gamma_bookkeeping;  // F(X_rho) - F(0) - Y
  double max_discrepancy = 0.0;  // sup_t |gamma - gamma_bookkeeping|
};

// Predictable part via the C^2 formula:
//   Gamma_t = (S)int_0^t f(X_{s-}) dA_s - 1/2 sum f'(X_{s-]) (dA_s)^2
//             + 1/2 int_0^t f'(X_s) d[M,M]^c_s + nu-term,
// with the (S)-integral realized by its defining corrected Riemann sums
//   sum [ f(X_{t_i}) dA + 1/2 f'(X_{t_i}) (dA)^2 ]
// and [M,M]^c read at grid scale as (dM)^2 minus the ledger jump squares.
inline GammaResult gamma_C2(const Decomposition& d, const TransformSpec& tf,
                            const JumpCompensator& nu, SubdivisionPtr level) {
  if (tf.smoothness != Smoothness::C2 || !tf.fprime)
    throw std::invalid_argument("gamma_C2 requires a C2-tagged transform (use gamma_C1)");
  const Subdivision& g = *level;
  const auto ix = wdp::detail::locate(g, d.X.grid());
  const auto im = wdp::detail::locate(g, d.M.grid());
  const auto ia = wdp::detail::locate(g, d.A.grid());
  const auto& xv = d.X.values();
  const auto& mv = d.M.values();
  const auto& av = d.A.values();
  const SamplePath Y = martingale_part_Y(d, tf, nu, level);

  std::vector<double> gam(g.size(), 0.0), book(g.size(), 0.0);
  const double F0 = tf.F(xv[ix[0]]);
  std::size_t jm = 0, ja = 0;
  double msq_jumps = 0.0;  // running sum of f'(X_{s-}) (dM_s)^2 over the ledger
  double asq_jumps = 0.0;  // running sum of f'(X_{s-}) (dA_s)^2 over the ledger
  double acc = 0.0;
  double discrepancy = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double xl = xv[ix[i - 1]];
    const double da = av[ia[i]] - av[ia[i - 1]];
    const double dm = mv[im[i]] - mv[im[i - 1]];
    acc += tf.f(xl) * da + 0.5 * tf.fprime(xl) * da * da;  // (S)-integral sums
    acc += 0.5 * tf.fprime(xl) * dm * dm;                  // d[M,M] part, jumps removed below
    if (nu.kind == JumpCompensator::Kind::PoissonUnit)
      acc += nu.lambda * detail::poisson_bracket(tf, xl) * (g[i] - g[i - 1]);
    while (jm < d.M.jumps().size() && d.M.jumps()[jm].t <= g[i]) {
      const double t = d.M.jumps()[jm].t;
      const double pre = d.X.pre_value_at(t);
      msq_jumps += tf.fprime(pre) * d.M.jumps()[jm].dx * d.M.jumps()[jm].dx;
      ++jm;
    }
    while (ja < d.A.jumps().size() && d.A.jumps()[ja].t <= g[i]) {
      const double t = d.A.jumps()[ja].t;
      const double pre = d.X.pre_value_at(t);
      asq_jumps += tf.fprime(pre) * d.A.jumps()[ja].dx * d.A.jumps()[ja].dx;
      ++ja;
    }
    gam[i] = acc - 0.5 * msq_jumps - 0.5 * asq_jumps;
    book[i] = tf.F(xv[ix[i]]) - F0 - Y.value_at_index(i);
    discrepancy = std::max(discrepancy, std::abs(gam[i] - book[i]));
  }
  GammaResult res{SamplePath(level, std::move(gam)), SamplePath(level, std::move(book)),
                  discrepancy};
  return res;
}

// C^1 transforms: no term formula exists; Gamma is defined by bookkeeping,
//   Gamma_t := F(X_{rho(t)}) - F(0) - Y_t.
inline SamplePath gamma_C1(const Decomposition& d, const TransformSpec& tf,
                           const JumpCompensator& nu, SubdivisionPtr level) {
  const Subdivision& g = *level;
  const auto ix = wdp::detail::locate(g, d.X.grid());
  const SamplePath Y = martingale_part_Y(d, tf, nu, level);
  const double F0 = tf.F(d.X.values()[ix[0]]);
  std::vector<double> gam(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    gam[i] = tf.F(d.X.values()[ix[i]]) - F0 - Y.value_at_index(i);
  return SamplePath(std::move(level), std::move(gam));
}

struct QvTransformRow {
  int level = 0;
  double lhs = 0.0;       // S^n(F(X), F(X))_T
  double rhs = 0.0;       // f^2 against [M,M]^c and [A,A]^c plus jump squares
  double residual = 0.0;
};

// Quadratic variation of the transform:
//   [F(X),F(X)]_t = int (f(X_s))^2 d[M,M]^c + int (f(X_s))^2 d[A,A]^c
//                   + sum (F(X_s) - F(X_{s-}))^2,
// compared per level against the direct squared-increment sum of F(X).
inline std::vector<QvTransformRow> qv_of_transform(const Decomposition& d,
                                                   const TransformSpec& tf,
                                                   const SubdivisionSequence& seq) {
  const auto& xg = d.X.grid();
  std::vector<double> fx(xg.size());
  for (std::size_t i = 0; i < xg.size(); ++i)
    fx[i] = tf.F(d.X.value_at_index(i)) - tf.F(d.X.value_at_index(0));
  std::vector<Jump> fj;
  double jump_sq = 0.0;
  for (const Jump& j : d.X.jumps()) {
    const double post = tf.F(d.X.value_at(j.t));
    const double pre = tf.F(d.X.pre_value_at(j.t));
    fj.push_back({j.t, post - pre});
    jump_sq += (post - pre) * (post - pre);
  }
  const SamplePath FX(d.X.grid_ptr(), std::move(fx), std::move(fj));

  std::vector<QvTransformRow> rows;
  for (const auto& [n, sub] : seq.levels()) {
    const double T = sub->horizon();
    QvTransformRow row;
    row.level = n;
    row.lhs = covariation_sum(FX, FX, *sub, T);
    const auto ix = wdp::detail::locate(*sub, xg);
    const auto im = wdp::detail::locate(*sub, d.M.grid());
    const auto ia = wdp::detail::locate(*sub, d.A.grid());
    double cont = 0.0, fsq_m_jumps = 0.0, fsq_a_jumps = 0.0;
    for (std::size_t i = 0; i + 1 < sub->size(); ++i) {
      const double w = tf.f(d.X.values()[ix[i]]);
      const double dm = d.M.values()[im[i + 1]] - d.M.values()[im[i]];
      const double da = d.A.values()[ia[i + 1]] - d.A.values()[ia[i]];
      cont += w * w * (dm * dm + da * da);
    }
    // Remove the jump squares weighted by f^2 at the pre-jump value.
    for (const Jump& j : d.M.jumps()) {
      const double w = tf.f(d.X.pre_value_at(j.t));
      fsq_m_jumps += w * w * j.dx * j.dx;
    }
    for (const Jump& j : d.A.jumps()) {
      const double w = tf.f(d.X.pre_value_at(j.t));
      fsq_a_jumps += w * w * j.dx * j.dx;
    }
    row.rhs = cont - fsq_m_jumps - fsq_a_jumps + jump_sq;
    row.residual = std::abs(row.lhs - row.rhs);
    rows.push_back(row);
  }
  return rows;
}

// [Gamma, N] = 0 for continuous local martingales N: reuse the ensemble
// orthogonality machinery with (Gamma_i, N_i) pairs.
inline OrthogonalityReport orthogonality_of_gamma(
    const std::function<std::pair<SamplePath, SamplePath>(std::uint64_t)>& gamma_and_N,
    const SubdivisionSequence& seq, std::size_t n_paths, double se_mult = 3.0,
    unsigned workers = 0) {
  return orthogonality_test(gamma_and_N, seq, n_paths, se_mult, workers);
}

struct ItoReport {
  SamplePath Y;
  SamplePath Gamma;
  double reconstruction_residual = 0.0;  // sup over grid of |F(X)-F(0)-Y-Gamma|
  double gamma_discrepancy = 0.0;        // term formula vs bookkeeping (C2 only)
};

inline ItoReport run_ito(const Decomposition& d, const TransformSpec& tf,
                         const JumpCompensator& nu, SubdivisionPtr level) {
  if (tf.smoothness == Smoothness::C2 && tf.fprime) {
    GammaResult g = gamma_C2(d, tf, nu, level);
    SamplePath Y = martingale_part_Y(d, tf, nu, level);
    ItoReport rep{std::move(Y), std::move(g.gamma), 0.0, g.max_discrepancy};
    // Reconstruction residual of the bookkeeping identity itself.
    const auto ix = wdp::detail::locate(*level, d.X.grid());
    const double F0 = tf.F(d.X.values()[ix[0]]);
    for (std::size_t i = 0; i < level->size(); ++i) {
      const double target = tf.F(d.X.values()[ix[i]]) - F0;
      rep.reconstruction_residual =
          std::max(rep.reconstruction_residual,
                   std::abs(target - rep.Y.value_at_index(i) - g.gamma_bookkeeping.value_at_index(i)));
    }
    return rep;
  }
  SamplePath Y = martingale_part_Y(d, tf, nu, level);
  SamplePath G = gamma_C1(d, tf, nu, level);
  return ItoReport{std::move(Y), std::move(G), 0.0, 0.0};
}

}  // namespace wdp
