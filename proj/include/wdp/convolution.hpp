#pragma once

// The convolution model X_t = int_0^t G(t,s) dL_s: kernel evaluation,
// precomputed weight matrices, path sampling, numeric audits of the kernel
// hypotheses, the bracket process B of the weak Dirichlet decomposition,
// and the Fubini-type identity check.
//
// Kernels follow the zero-above-diagonal convention G(t,s) = 0 for s > t.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wdp/estimators.hpp"
#include "wdp/grid.hpp"
#include "wdp/mc.hpp"
#include "wdp/quadrature.hpp"
#include "wdp/sample_path.hpp"

namespace wdp {

// ---------------------------------------------------------------------------
// Kernel kinds
// ---------------------------------------------------------------------------

// G(t,s) = c s^{1/2-H} int_s^t u^{H-1/2} (u-s)^{H-3/2} du for t >= s > 0.
// The endpoint singularity is removed by u = s + v^{2/(2H-1)}, which maps the
// integrand to the bounded q (s + v^q)^{H-1/2}.
//
// G(t,0) is returned as 0: the s^{1/2-H} prefactor diverges there, and the
// convention simply drops the first-increment weight of a grid sum, an
// O(mesh) perturbation.
struct FractionalKernel {
  double H = 0.75;
  double c = 1.0;
  double quad_tol = 1e-9;  // relative tolerance of the kernel quadrature

  FractionalKernel(double H_, double c_ = 1.0, double quad_tol_ = 1e-9)
      : H(H_), c(c_), quad_tol(quad_tol_) {
    if (!(H > 0.5 && H < 1.0)) throw std::invalid_argument("Fractional kernel needs H in (1/2,1)");
    if (!(c > 0.0)) throw std::invalid_argument("Fractional kernel needs c > 0");
  }

  double raw_integrand(double u, double s) const {
    return std::pow(u, H - 0.5) * std::pow(u - s, H - 1.5);
  }

  // int_s^t u^{H-1/2} (u-s)^{H-3/2} du via the substituted form.
  double inner_integral(double t, double s) const {
    if (!(t > s)) return 0.0;
    const double q = 2.0 / (2.0 * H - 1.0);
    const double V = std::pow(t - s, 1.0 / q);
    const auto g = [&](double v) { return q * std::pow(s + std::pow(v, q), H - 0.5); };
    const double scale = std::max(V * std::pow(t, H - 0.5), 1e-30);
    return adaptive_simpson(g, 0.0, V, quad_tol * scale);
  }

  double operator()(double t, double s) const {
    if (s > t) return 0.0;
    if (s < 0.0 || t < 0.0) throw std::domain_error("fractional kernel: negative time");
    if (s == 0.0 || s == t) return 0.0;
    return c * std::pow(s, 0.5 - H) * inner_integral(t, s);
  }

  // Closed bound |G|((s,T],s) <= c/(H-1/2) s^{1/2-H}.
  double variation_bound(double s) const { return c / (H - 0.5) * std::pow(s, 0.5 - H); }
};

// G(t,s) = beta(t) f(s) for t >= s, with beta a frozen trajectory.
struct ProductBetaFKernel {
  std::shared_ptr<const SamplePath> beta;
  std::function<double(double)> f;
  std::string f_name = "f";
};

// G(t,s) = int_s^t f(u,s) dbeta_u as a grid sum along beta's grid.
struct VolterraBetaKernel {
  std::function<double(double, double)> f;  // f(u,s)
  std::shared_ptr<const SamplePath> beta;
  std::string f_name = "f";
};

// Values on a rectangular grid, bilinearly interpolated.
struct TabulatedKernel {
  std::vector<double> t_grid;
  std::vector<double> s_grid;
  std::vector<double> values;  // row-major [t][s]

  static TabulatedKernel constant(double v, std::vector<double> ts, std::vector<double> ss) {
    TabulatedKernel k;
    k.t_grid = std::move(ts);
    k.s_grid = std::move(ss);
    k.values.assign(k.t_grid.size() * k.s_grid.size(), v);
    return k;
  }
};

using KernelSpec = std::variant<FractionalKernel, ProductBetaFKernel, VolterraBetaKernel, TabulatedKernel>;

// Linear interpolation of a sampled path at an arbitrary time.
inline double eval_path_interp(const SamplePath& p, double t) {
  const auto& pts = p.grid().points();
  auto it = std::lower_bound(pts.begin(), pts.end(), t);
  if (it != pts.end() && *it == t) return p.value_at_index(static_cast<std::size_t>(it - pts.begin()));
  if (it == pts.begin() || it == pts.end()) throw std::out_of_range("path evaluation outside grid");
  const std::size_t hi = static_cast<std::size_t>(it - pts.begin());
  const double w = (t - pts[hi - 1]) / (pts[hi] - pts[hi - 1]);
  return (1.0 - w) * p.value_at_index(hi - 1) + w * p.value_at_index(hi);
}

namespace detail {
inline double interp1(const std::vector<double>& g, const std::vector<double>& v, double x,
                      std::size_t stride, std::size_t offset) {
  auto it = std::lower_bound(g.begin(), g.end(), x);
  if (it == g.end()) throw std::out_of_range("tabulated kernel: coordinate outside grid");
  std::size_t hi = static_cast<std::size_t>(it - g.begin());
  if (g[hi] == x) return v[offset + hi * stride];
  if (hi == 0) throw std::out_of_range("tabulated kernel: coordinate outside grid");
  const double w = (x - g[hi - 1]) / (g[hi] - g[hi - 1]);
  return (1.0 - w) * v[offset + (hi - 1) * stride] + w * v[offset + hi * stride];
}
}  // namespace detail

inline double eval_kernel(const KernelSpec& kernel, double t, double s) {
  if (s > t) return 0.0;
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, FractionalKernel>) {
          return k(t, s);
        } else if constexpr (std::is_same_v<K, ProductBetaFKernel>) {
          return eval_path_interp(*k.beta, t) * k.f(s);
        } else if constexpr (std::is_same_v<K, VolterraBetaKernel>) {
          const auto& g = k.beta->grid();
          const auto& bv = k.beta->values();
          double sum = 0.0;
          for (std::size_t j = g.rho_index(s); j + 1 < g.size() && g[j + 1] <= t; ++j)
            if (g[j] >= s) sum += k.f(g[j], s) * (bv[j + 1] - bv[j]);
          return sum;
        } else {
          static_assert(std::is_same_v<K, TabulatedKernel>);
          // Bilinear in t of the s-interpolated rows.
          const auto& tg = k.t_grid;
          auto it = std::lower_bound(tg.begin(), tg.end(), t);
          if (it == tg.end()) throw std::out_of_range("tabulated kernel: t outside grid");
          const std::size_t hi = static_cast<std::size_t>(it - tg.begin());
          const double vh = detail::interp1(k.s_grid, k.values, s, 1, hi * k.s_grid.size());
          if (tg[hi] == t || hi == 0) return vh;
          const double vl = detail::interp1(k.s_grid, k.values, s, 1, (hi - 1) * k.s_grid.size());
          const double w = (t - tg[hi - 1]) / (tg[hi] - tg[hi - 1]);
          return (1.0 - w) * vl + w * vh;
        }
      },
      kernel);
}

// ---------------------------------------------------------------------------
// Precomputed weights W(i,j) = G(t_i, s_j) on a grid, shared across paths
// ---------------------------------------------------------------------------

struct KernelWeights {
  SubdivisionPtr grid;
  bool separable = false;
  std::vector<double> beta_t;  // separable: G(t,s) = beta_t[i] * f_s[j]
  std::vector<double> f_s;
  std::vector<double> tri;   // general: packed strict lower triangle, i >= 1, j < i
  std::vector<double> diag;  // G(s_j, s_j)

  double w(std::size_t i, std::size_t j) const {
    return separable ? beta_t[i] * f_s[j] : tri[i * (i - 1) / 2 + j];
  }
};

inline KernelWeights build_kernel_weights(const KernelSpec& kernel, SubdivisionPtr grid) {
  KernelWeights kw;
  kw.grid = grid;
  const Subdivision& g = *grid;
  const std::size_t n = g.size();
  kw.diag.assign(n, 0.0);

  if (const auto* pk = std::get_if<ProductBetaFKernel>(&kernel)) {
    kw.separable = true;
    kw.beta_t.resize(n);
    kw.f_s.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      kw.beta_t[i] = eval_path_interp(*pk->beta, g[i]);
      kw.f_s[i] = pk->f(g[i]);
      kw.diag[i] = kw.beta_t[i] * kw.f_s[i];
    }
    return kw;
  }

  kw.tri.assign(n * (n - 1) / 2, 0.0);
  if (const auto* fk = std::get_if<FractionalKernel>(&kernel)) {
    // Column-incremental: the first panel above the singularity uses the
    // substituted form, later panels plain 16-point Gauss-Legendre.
    parallel_for(n - 1, default_workers(), [&](std::size_t jm) {
      const std::size_t j = jm + 1;  // s_0 = 0 keeps zero weights
      const double s = g[j];
      const double pref = fk->c * std::pow(s, 0.5 - fk->H);
      double acc = fk->inner_integral(g[j + 1 <= n - 1 ? j + 1 : j], s);
      if (j + 1 <= n - 1) kw.tri[(j + 1) * j / 2 + j] = pref * acc;
      for (std::size_t i = j + 2; i < n; ++i) {
        acc += gauss16([&](double u) { return fk->raw_integrand(u, s); }, g[i - 1], g[i]);
        kw.tri[i * (i - 1) / 2 + j] = pref * acc;
      }
    });
    return kw;
  }
  if (const auto* vk = std::get_if<VolterraBetaKernel>(&kernel)) {
    // Accumulate along beta's own grid so the matrix agrees with
    // eval_kernel; snapshots are taken at the target grid times.
    const Subdivision& bg = vk->beta->grid();
    const auto& bv = vk->beta->values();
    if (!grid->subset_of(bg))
      throw std::invalid_argument("VolterraBeta kernel: beta resolution below the grid");
    for (std::size_t j = 0; j < n; ++j) {
      const double s = g[j];
      double acc = 0.0;
      std::size_t k = bg.index_of(s);
      for (std::size_t i = j + 1; i < n; ++i) {
        while (k + 1 < bg.size() && bg[k + 1] <= g[i]) {
          acc += vk->f(bg[k], s) * (bv[k + 1] - bv[k]);
          ++k;
        }
        kw.tri[i * (i - 1) / 2 + j] = acc;
      }
    }
    return kw;
  }
  // Generic route: evaluation failures surface with their coordinates.
  auto eval_at = [&](double t, double s) {
    try {
      return eval_kernel(kernel, t, s);
    } catch (const std::exception& e) {
      throw std::runtime_error("kernel evaluation failed at (t=" + std::to_string(t) +
                               ", s=" + std::to_string(s) + "): " + e.what());
    }
  };
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) kw.tri[i * (i - 1) / 2 + j] = eval_at(g[i], g[j]);
  for (std::size_t j = 0; j < n; ++j) kw.diag[j] = eval_at(g[j], g[j]);
  return kw;
}

// X_{t_i} = sum_{j < i} W(i,j) (L_{s_{j+1}} - L_{s_j}), with the jump ledger
// {(s, G(s,s) dL_s)} inherited from L where G(s,s) is nonzero.
inline SamplePath convolve(const KernelWeights& kw, const SamplePath& L) {
  const Subdivision& g = *kw.grid;
  const std::size_t n = g.size();
  if (&L.grid() != kw.grid.get() && L.grid().points() != g.points())
    throw std::invalid_argument("convolve: L is not sampled on the weight grid");
  const auto& lv = L.values();
  std::vector<double> x(n, 0.0);
  if (kw.separable) {
    double prefix = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      prefix += kw.f_s[i - 1] * (lv[i] - lv[i - 1]);
      x[i] = kw.beta_t[i] * prefix;
    }
  } else {
    parallel_for(n - 1, default_workers(), [&](std::size_t im) {
      const std::size_t i = im + 1;
      const double* row = kw.tri.data() + i * (i - 1) / 2;
      double sum = 0.0;
      for (std::size_t j = 0; j < i; ++j) sum += row[j] * (lv[j + 1] - lv[j]);
      x[i] = sum;
    });
  }
  std::vector<Jump> jumps;
  for (const Jump& jl : L.jumps()) {
    const double gss = kw.diag[g.index_of(jl.t)];
    if (gss != 0.0) jumps.push_back({jl.t, gss * jl.dx});
  }
  SamplePath out(kw.grid, std::move(x), std::move(jumps));
  out.set_snap_warning(L.snap_warning());
  return out;
}

inline SamplePath sample_convolution(const KernelSpec& kernel, const SamplePath& L,
                                     SubdivisionPtr grid) {
  SamplePath base = (&L.grid() == grid.get() || L.grid().points() == grid->points())
                        ? L
                        : L.restrict_to(grid);
  if (base.interpolated())
    throw std::invalid_argument("sample_convolution: L must be sampled on the grid or finer");
  return convolve(build_kernel_weights(kernel, grid), base);
}

// ---------------------------------------------------------------------------
// Covariation profile [G(.,u),G(.,v)]_t and the bracket process B
// ---------------------------------------------------------------------------

// [G(.,u),G(.,v)]_t computed along the grid itself (resolution matching the
// paths it will be used with). Separable kernels reduce to a suffix
// quadratic-variation profile of beta; anything else stores a dense matrix.
struct CovariationProfile {
  SubdivisionPtr grid;
  double t = 0.0;
  bool separable = false;
  std::vector<double> q;    // separable: q[j] = sum_{t_i >= s_j, t_{i+1} <= t} (dbeta)^2
  std::vector<double> f_s;  // separable: f at grid points
  std::vector<double> dense;  // general: row-major C(u_j, v_k), j,k < grid.size()

  double c(std::size_t j, std::size_t k) const {
    if (separable) return q[std::max(j, k)] * f_s[j] * f_s[k];
    return dense[j * f_s.size() + k];
  }
};

inline CovariationProfile make_covariation_profile(const KernelSpec& kernel, SubdivisionPtr grid,
                                                   double t) {
  CovariationProfile cp;
  cp.grid = grid;
  cp.t = t;
  const Subdivision& g = *grid;
  const std::size_t n = g.size();
  if (const auto* pk = std::get_if<ProductBetaFKernel>(&kernel)) {
    cp.separable = true;
    const SamplePath beta = pk->beta->restrict_to(grid);
    cp.f_s.resize(n);
    for (std::size_t j = 0; j < n; ++j) cp.f_s[j] = pk->f(g[j]);
    cp.q.assign(n, 0.0);
    // suffix sums of squared beta increments over intervals inside (s_j, t]
    double acc = 0.0;
    std::vector<double> suffix(n, 0.0);
    for (std::size_t i = n - 1; i-- > 0;) {
      if (g[i + 1] <= t) {
        const double d = beta.value_at_index(i + 1) - beta.value_at_index(i);
        acc += d * d;
      }
      suffix[i] = acc;
    }
    cp.q = std::move(suffix);
    return cp;
  }
  cp.f_s.assign(n, 0.0);  // sized marker for dense indexing
  cp.dense.assign(n * n, 0.0);
  // Kernel columns on the grid, then pairwise increment products.
  std::vector<double> col(n * n, 0.0);
  parallel_for(n, default_workers(), [&](std::size_t j) {
    for (std::size_t i = 0; i < n; ++i) col[j * n + i] = eval_kernel(kernel, g[i], g[j]);
  });
  parallel_for(n, default_workers(), [&](std::size_t j) {
    for (std::size_t k = j; k < n; ++k) {
      const double lo = g[std::max(j, k)];
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        if (g[i] < lo || g[i + 1] > t) continue;
        sum += (col[j * n + i + 1] - col[j * n + i]) * (col[k * n + i + 1] - col[k * n + i]);
      }
      cp.dense[j * n + k] = sum;
      cp.dense[k * n + j] = sum;
    }
  });
  return cp;
}

// B_t = int_0^t [G(.,s),G(.,s)]_t d[L,L]_s
//       + 2 int_0^t ( int_0^v [G(.,u),G(.,v)]_t dL_u )_- dL_v,
// discretized with the left limit of the inner running sum standing in for
// the predictable projection.
inline double b_process(const CovariationProfile& cp, const SamplePath& L, double t) {
  if (cp.grid->points() != L.grid().points())
    throw std::invalid_argument("b_process: profile resolution does not match the path grid");
  if (t > cp.t) throw std::invalid_argument("b_process: t beyond the profile horizon");
  const Subdivision& g = *cp.grid;
  const auto& lv = L.values();
  const std::size_t n = g.size();
  double term1 = 0.0;
  for (std::size_t j = 0; j + 1 < n && g[j + 1] <= t; ++j) {
    const double dl = lv[j + 1] - lv[j];
    term1 += cp.c(j, j) * dl * dl;
  }
  double term2 = 0.0;
  if (cp.separable) {
    double prefix = 0.0;  // sum_{u_{j+1} <= v_k} f(u_j) dL_j
    for (std::size_t k = 0; k + 1 < n && g[k + 1] <= t; ++k) {
      if (k > 0) prefix += cp.f_s[k - 1] * (lv[k] - lv[k - 1]);
      const double inner = cp.q[k] * cp.f_s[k] * prefix;
      term2 += inner * (lv[k + 1] - lv[k]);
    }
  } else {
    for (std::size_t k = 0; k + 1 < n && g[k + 1] <= t; ++k) {
      double inner = 0.0;
      for (std::size_t j = 0; j + 1 <= k; ++j) inner += cp.c(j, k) * (lv[j + 1] - lv[j]);
      term2 += inner * (lv[k + 1] - lv[k]);
    }
  }
  return term1 + 2.0 * term2;
}

inline double b_process(const KernelSpec& kernel, const SamplePath& L, SubdivisionPtr grid,
                        double t) {
  return b_process(make_covariation_profile(kernel, std::move(grid), t), L, t);
}

// ---------------------------------------------------------------------------
// Fubini identity of the Volterra representation
// ---------------------------------------------------------------------------

struct FubiniResult {
  double lhs = 0.0;  // int_0^t ( int_s^t f(u,s) dbeta_u ) dL_s
  double rhs = 0.0;  // int_0^t ( int_0^u f(u,s) dL_s ) dbeta_u
  double residual = 0.0;
};

inline FubiniResult fubini_check(const std::function<double(double, double)>& f,
                                 const SamplePath& beta_path, const SamplePath& L,
                                 SubdivisionPtr grid, double t) {
  const SamplePath beta = beta_path.grid().points() == grid->points()
                              ? beta_path
                              : beta_path.restrict_to(grid);
  const SamplePath Lr = L.grid().points() == grid->points() ? L : L.restrict_to(grid);
  const Subdivision& g = *grid;
  const std::size_t n = g.size();
  const auto& bv = beta.values();
  const auto& lv = Lr.values();
  std::size_t last = 0;  // number of increments inside [0,t]
  while (last + 1 < n && g[last + 1] <= t) ++last;

  std::vector<double> lhs_terms(last, 0.0), rhs_terms(last, 0.0);
  const unsigned workers = default_workers();
  parallel_for(last, workers, [&](std::size_t j) {
    // lhs: increment of L over (s_j, s_{j+1}], inner sum over u in [s_j, t)
    double inner = 0.0;
    for (std::size_t k = j; k < last; ++k) inner += f(g[k], g[j]) * (bv[k + 1] - bv[k]);
    lhs_terms[j] = inner * (lv[j + 1] - lv[j]);
  });
  parallel_for(last, workers, [&](std::size_t k) {
    // rhs: increment of beta over (u_k, u_{k+1}], inner sum over s with s_{j+1} <= u_k
    double inner = 0.0;
    for (std::size_t j = 0; j + 1 <= k; ++j) inner += f(g[k], g[j]) * (lv[j + 1] - lv[j]);
    rhs_terms[k] = inner * (bv[k + 1] - bv[k]);
  });
  FubiniResult r;
  r.lhs = pairwise_sum(lhs_terms);
  r.rhs = pairwise_sum(rhs_terms);
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace wdp
