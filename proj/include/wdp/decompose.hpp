#pragma once

// Natural (Doob-Meyer type) decompositions X = M + A: the closed form for
// convolution models, the Graversen-Rao discrete approximant M^n driven by a
// conditional-expectation oracle, and the orthogonality / minimality
// diagnostics that characterize the decomposition.
//
// Grid-sum convention in this module: M^n at a grid time t accumulates
// complete increments only (right endpoint <= t), which makes the
// telescoping identity M^n_t + A^n_t = X_{rho^n(t)} exact.

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wdp/convolution.hpp"
#include "wdp/estimators.hpp"
#include "wdp/grid.hpp"
#include "wdp/mc.hpp"
#include "wdp/sample_path.hpp"

namespace wdp {

enum class Provenance { ClosedFormConvolution, GraversenRaoLevel };

struct Decomposition {
  SamplePath X;
  SamplePath M;
  SamplePath A;
  Provenance provenance = Provenance::ClosedFormConvolution;
  int gr_level = 0;  // meaningful for GraversenRaoLevel
  std::map<std::string, double> diagnostics;
};

// E[X_{t'} - X_t | F_t] along one driver path.
using CondExpOracle = std::function<double(double t, double t_next)>;

// Conditional-expectation oracle of the convolution model:
//   E[X_{t'} - X_t | F_t] = int_0^t (G(t',s) - G(t,s)) dL_s
// as a grid sum over L's increments with s_{j+1} <= t.
inline CondExpOracle make_convolution_oracle(const KernelSpec& kernel, const SamplePath& L) {
  if (const auto* pk = std::get_if<ProductBetaFKernel>(&kernel)) {
    // Separable kernels reduce to (beta(t') - beta(t)) * prefix_f(t).
    const auto& g = L.grid();
    auto prefix = std::make_shared<std::vector<double>>(g.size(), 0.0);
    for (std::size_t j = 1; j < g.size(); ++j)
      (*prefix)[j] = (*prefix)[j - 1] + pk->f(g[j - 1]) * (L.value_at_index(j) - L.value_at_index(j - 1));
    auto beta = pk->beta;
    auto grid = L.grid_ptr();
    return [prefix, beta, grid](double t, double t_next) {
      const double db = eval_path_interp(*beta, t_next) - eval_path_interp(*beta, t);
      return db * (*prefix)[grid->index_of(t)];
    };
  }
  auto weights = std::make_shared<KernelWeights>(build_kernel_weights(kernel, L.grid_ptr()));
  auto values = std::make_shared<std::vector<double>>(L.values());
  auto grid = L.grid_ptr();
  return [weights, values, grid](double t, double t_next) {
    const std::size_t it = grid->index_of(t);
    const std::size_t in = grid->index_of(t_next);
    double sum = 0.0;
    for (std::size_t j = 0; j < it; ++j) {
      const double dl = (*values)[j + 1] - (*values)[j];
      sum += (weights->w(in, j) - weights->w(it, j)) * dl;
    }
    return sum;
  };
}

// Oracle consistent with an exact martingale (zero conditional increments).
inline CondExpOracle zero_oracle() {
  return [](double, double) { return 0.0; };
}

// M^n of the Graversen-Rao construction on the given subdivision:
//   M^n_t = sum_{t_i <= t} [ X_{t_i} - E[X_{t_i} | F_{t_{i-1}}] ]
// evaluated at grid points; pair with A^n (the running oracle sum) through
// graversen_rao_An for the exact telescoping X_{rho^n(t)} = M^n_t + A^n_t.
inline SamplePath graversen_rao_Mn(const SamplePath& X, SubdivisionPtr sub,
                                   const CondExpOracle& oracle) {
  const Subdivision& g = *sub;
  std::vector<double> m(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    double cond;
    try {
      cond = oracle(g[i - 1], g[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("conditional-expectation oracle failed on [" +
                               std::to_string(g[i - 1]) + "," + std::to_string(g[i]) +
                               "]: " + e.what());
    }
    m[i] = m[i - 1] + (X.value_at(g[i]) - X.value_at(g[i - 1])) - cond;
  }
  return SamplePath(std::move(sub), std::move(m));
}

inline SamplePath graversen_rao_An(const SamplePath& X, SubdivisionPtr sub,
                                   const CondExpOracle& oracle) {
  (void)X;
  const Subdivision& g = *sub;
  std::vector<double> a(g.size(), 0.0);
  for (std::size_t i = 1; i < g.size(); ++i) a[i] = a[i - 1] + oracle(g[i - 1], g[i]);
  return SamplePath(std::move(sub), std::move(a));
}

// Closed-form natural decomposition of the convolution model:
//   M_t = int_0^t G(s,s) dL_s  (grid sum),  A = X - M.
inline Decomposition natural_decomposition_convolution(const KernelSpec& kernel,
                                                       const SamplePath& L,
                                                       const KernelWeights* weights = nullptr) {
  KernelWeights local;
  if (!weights) {
    local = build_kernel_weights(kernel, L.grid_ptr());
    weights = &local;
  }
  for (std::size_t j = 0; j < weights->diag.size(); ++j)
    if (!std::isfinite(weights->diag[j]))
      throw std::domain_error("kernel diagonal G(s,s) is singular at s = " +
                              std::to_string((*weights->grid)[j]));
  SamplePath X = convolve(*weights, L);
  const Subdivision& g = *weights->grid;
  std::vector<double> m(g.size(), 0.0), a(g.size(), 0.0);
  const auto& lv = L.values();
  for (std::size_t i = 1; i < g.size(); ++i)
    m[i] = m[i - 1] + weights->diag[i - 1] * (lv[i] - lv[i - 1]);
  for (std::size_t i = 0; i < g.size(); ++i) a[i] = X.value_at_index(i) - m[i];
  std::vector<Jump> mj;
  for (const Jump& j : L.jumps()) {
    const double gss = weights->diag[g.index_of(j.t)];
    if (gss != 0.0) mj.push_back({j.t, gss * j.dx});
  }
  Decomposition d{std::move(X), SamplePath(L.grid_ptr(), std::move(m), std::move(mj)),
                  SamplePath(L.grid_ptr(), std::move(a)), Provenance::ClosedFormConvolution, 0, {}};
  return d;
}

struct OrthogonalityReport {
  std::vector<LevelRow> per_level;  // mean and SE of S^n(A,N)_T
  bool deepest_ci_contains_zero = false;
  TrendVerdict trend = TrendVerdict::Inconclusive;
  bool verdict = false;  // CI contains 0 at the deepest level and |mean| decreasing
};

// Ensemble test of [A,N] = 0: the factory yields the pair (A_i, N_i) for
// path index i; per level n we aggregate S^n(A,N)_T.
inline OrthogonalityReport orthogonality_test(
    const std::function<std::pair<SamplePath, SamplePath>(std::uint64_t)>& pair_factory,
    const SubdivisionSequence& seq, std::size_t n_paths, double se_mult = 3.0,
    unsigned workers = 0) {
  const std::size_t k = seq.count();
  std::vector<std::string> names;
  for (const auto& [n, sub] : seq.levels()) names.push_back("S^" + std::to_string(n) + "(A,N)_T");
  EnsembleConfig cfg{0, n_paths, workers};
  auto stats = run_ensemble(
      cfg,
      [&](std::uint64_t i) {
        const auto [A, N] = pair_factory(i);
        std::vector<double> row(k);
        for (std::size_t c = 0; c < k; ++c) {
          const Subdivision& sub = *seq.levels()[c].second;
          row[c] = covariation_sum(A, N, sub, sub.horizon());
        }
        return row;
      },
      names);
  OrthogonalityReport rep;
  std::vector<LevelRow> rows;
  for (std::size_t c = 0; c < k; ++c) {
    LevelRow row{seq.levels()[c].first, seq.levels()[c].second->mesh(), stats[c].mean, stats[c].se};
    rows.push_back(row);
  }
  rep.per_level = rows;
  const auto& last = rows.back();
  rep.deepest_ci_contains_zero = std::abs(last.mean) <= se_mult * last.se;
  rep.trend = convergence_table(rows, se_mult).verdict;
  rep.verdict = rep.deepest_ci_contains_zero && (rep.trend == TrendVerdict::Decreasing ||
                                                 rep.trend == TrendVerdict::Flat);
  return rep;
}

// Minimality residual of an alternative decomposition X = alt_M + alt_A:
//   r_n = S^n(A',A')_T - S^n(M-M',M-M')_T - S^n(A,A)_T
// per level, for one path. The bracket identity makes r_n vanish in the
// limit when alt_M differs from the natural M by a continuous martingale.
inline std::vector<std::pair<int, double>> minimality_residuals(const Decomposition& natural,
                                                                const SamplePath& alt_M,
                                                                const SubdivisionSequence& seq) {
  const auto& g = natural.X.grid();
  if (alt_M.grid().points() != g.points())
    throw std::invalid_argument("minimality_residuals: alt_M grid mismatch");
  std::vector<double> altA(g.size()), dm(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    altA[i] = natural.X.value_at_index(i) - alt_M.value_at_index(i);
    dm[i] = natural.M.value_at_index(i) - alt_M.value_at_index(i);
  }
  SamplePath Ap(natural.X.grid_ptr(), std::move(altA));
  SamplePath Dm(natural.X.grid_ptr(), std::move(dm));
  std::vector<std::pair<int, double>> out;
  for (const auto& [n, sub] : seq.levels()) {
    const double T = sub->horizon();
    const double r = covariation_sum(Ap, Ap, *sub, T) - covariation_sum(Dm, Dm, *sub, T) -
                     covariation_sum(natural.A, natural.A, *sub, T);
    out.emplace_back(n, r);
  }
  return out;
}

}  // namespace wdp
