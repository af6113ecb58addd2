// Closed-form exponent thresholds and admissible (p,q) regions, their
// optimizer over free parameters, and the jump-figure tabulation.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "frostlab/core.hpp"

namespace frostlab {

// An open upper bound, possibly +infinity. Strict-inequality thresholds are
// never attained, so every bound carries the open flag.
struct Bound {
  double value = 0.0;
  bool infinite = false;
  bool open = true;

  static Bound open_at(double v) { return Bound{v, false, true}; }
  static Bound unbounded() {
    return Bound{std::numeric_limits<double>::infinity(), true, true};
  }

  bool admits(double x) const { return infinite || x < value; }
};

struct ExponentInput {
  int d = 2;
  int n = 1;
  double s = 0.0;
  double t = 0.0;
  double alpha = 0.0;

  void validate() const {
    require(d >= 2, "ExponentInput: d >= 2 required");
    require(n >= 1 && n <= d - 1, "ExponentInput: need 1 <= n <= d-1");
    require(s > 0.0 && s < d, "ExponentInput: s must lie in (0, d)");
    require(t > 0.0 && t <= n, "ExponentInput: t must lie in (0, n]");
    require(alpha > 0.0 && alpha < d, "ExponentInput: alpha must lie in (0, d)");
    require(s + t >= 2.0 * n, "ExponentInput: s + t >= 2n required");
  }
};

// q_0 = 1 + (s+t-2n) / (2(d-alpha)); the pole at alpha -> d is reported as a
// tagged infinity.
inline Bound q0(const ExponentInput& in) {
  in.validate();
  const double excess = in.s + in.t - 2.0 * in.n;
  if (excess == 0.0) return Bound::open_at(1.0);
  if (in.alpha >= in.d - 1e-12) return Bound::unbounded();
  return Bound::open_at(1.0 + excess / (2.0 * (in.d - in.alpha)));
}

// Open upper bound 2n q_0 / (n + t) for the inner exponent p.
inline Bound p_max(const ExponentInput& in) {
  const Bound q = q0(in);
  if (q.infinite) return Bound::unbounded();
  return Bound::open_at(2.0 * in.n * q.value / (in.n + in.t));
}

// Which right-hand side applies at a given q: the energy form I_t(nu)^{1/2}
// exactly at q = q_0, the amplitude form A_{max{t, qt/(2q_0)}}(nu) above it.
struct MixedNormRhsForm {
  bool energy_form = false;
  double order = 0.0;  // t for the energy form, the amplitude order otherwise
};

inline MixedNormRhsForm mixed_norm_rhs_form(const ExponentInput& in, double q) {
  const Bound base = q0(in);
  require(!base.infinite, "mixed_norm_rhs_form: q0 is infinite");
  require(q >= base.value - 1e-12 * std::max(1.0, base.value),
          "mixed_norm_rhs_form: q must be >= q0");
  if (std::abs(q - base.value) <= 1e-12 * std::max(1.0, base.value))
    return MixedNormRhsForm{true, in.t};
  return MixedNormRhsForm{false, std::max(in.t, q * in.t / (2.0 * base.value))};
}

struct FrostmanPair {
  double s_mu = 0.0;
  double s_nu = 0.0;

  void validate(int d, int n) const {
    require(d >= 2 && n >= 1 && n <= d - 1, "FrostmanPair: need 1 <= n <= d-1");
    require(s_nu > 0.0 && s_nu < n, "FrostmanPair: s_nu must lie in (0, n)");
    require(s_mu > 2.0 * n - s_nu && s_mu < d,
            "FrostmanPair: s_mu must lie in (2n - s_nu, d)");
  }
};

enum class RegionCase { low, high, coupled };

inline const char* region_case_name(RegionCase c) {
  switch (c) {
    case RegionCase::low: return "low";
    case RegionCase::high: return "high";
    default: return "coupled";
  }
}

namespace detail {

// p-bound as a function of the free dimension parameter t, at s = alpha = s_mu.
inline double p_of_t(int d, int n, double s_mu, double t) {
  return 2.0 * n / (n + t) * (1.0 + (s_mu + t - 2.0 * n) / (2.0 * (d - s_mu)));
}

// q-bound as a function of t.
inline double q_of_t(int d, int n, double s_mu, double s_nu, double t) {
  return 2.0 * s_nu / t * (1.0 + (s_mu + t - 2.0 * n) / (2.0 * (d - s_mu)));
}

}  // namespace detail

// Coefficients of the coupled-case inequality
//   (s_mu - 2d + 3n) / (1 - ((d - s_mu)/n) p)  <  n + (2d - 2n - s_mu) / (((d - s_mu)/s_nu) q - 1),
// binding only where the right-hand denominator is positive.
struct CouplingConstraint {
  double lhs_numerator = 0.0;   // s_mu - 2d + 3n  (> 0 in the coupled case)
  double p_coefficient = 0.0;   // (d - s_mu) / n
  double additive_n = 0.0;      // n
  double rhs_numerator = 0.0;   // 2d - 2n - s_mu  (> 0 in the coupled case)
  double q_coefficient = 0.0;   // (d - s_mu) / s_nu
};

struct PQRegion {
  int d = 2, n = 1;
  double s_mu = 0.0, s_nu = 0.0;
  RegionCase case_label = RegionCase::low;
  Bound p_sup, q_sup;
  double t_lo = 0.0, t_hi = 0.0;  // open range of the free parameter
  std::optional<CouplingConstraint> coupling;

  // Exact membership: a pair is admissible iff some t in (t_lo, t_hi) keeps
  // both the p- and q-inequalities strict. Closed-form interval emptiness, so
  // boundary algebra never depends on a scan resolution.
  bool admits(double p, double q) const {
    if (p < 1.0 || q < 1.0) return false;
    const double a = (d - s_mu) * p / n - 1.0;
    const double b = (d - s_mu) * q / s_nu - 1.0;
    const double A = 2.0 * d - 3.0 * n - s_mu;
    const double B = 2.0 * d - 2.0 * n - s_mu;
    double lo = t_lo, hi = t_hi;
    // p-inequality: a (n + t) < A
    if (a == 0.0) {
      if (A <= 0.0) return false;
    } else if (a > 0.0) {
      if (A <= 0.0) return false;
      hi = std::min(hi, A / a - n);
    } else {
      lo = std::max(lo, A / a - n);
    }
    // q-inequality: b t < B
    if (b == 0.0) {
      if (B <= 0.0) return false;
    } else if (b > 0.0) {
      if (B <= 0.0) return false;
      hi = std::min(hi, B / b);
    } else {
      lo = std::max(lo, B / b);
    }
    return lo < hi;
  }
};

// The three-case admissible (p,q) region for a Frostman pair.
inline PQRegion admissible_pq_region(int d, int n, const FrostmanPair& pair) {
  pair.validate(d, n);
  PQRegion region;
  region.d = d;
  region.n = n;
  region.s_mu = pair.s_mu;
  region.s_nu = pair.s_nu;
  region.t_lo = std::max(2.0 * n - pair.s_mu, 0.0);
  region.t_hi = pair.s_nu;

  const double low_edge = 2.0 * d - 3.0 * n;
  const double high_edge = 2.0 * d - 2.0 * n;
  if (pair.s_mu <= low_edge)
    region.case_label = RegionCase::low;
  else if (pair.s_mu >= high_edge)
    region.case_label = RegionCase::high;
  else
    region.case_label = RegionCase::coupled;

  const auto p_at = [&](double t) { return detail::p_of_t(d, n, pair.s_mu, t); };
  const auto q_at = [&](double t) {
    return detail::q_of_t(d, n, pair.s_mu, pair.s_nu, t);
  };

  switch (region.case_label) {
    case RegionCase::low:
      region.p_sup = Bound::open_at(p_at(region.t_lo));
      region.q_sup = region.t_lo == 0.0 ? Bound::unbounded()
                                        : Bound::open_at(q_at(region.t_lo));
      break;
    case RegionCase::high:
      region.p_sup = Bound::open_at(p_at(region.t_hi));
      region.q_sup = Bound::open_at(q_at(region.t_hi));
      break;
    case RegionCase::coupled:
      region.p_sup = Bound::open_at(p_at(region.t_hi));
      region.q_sup = region.t_lo == 0.0 ? Bound::unbounded()
                                        : Bound::open_at(q_at(region.t_lo));
      region.coupling = CouplingConstraint{
          pair.s_mu - 2.0 * d + 3.0 * n, (d - pair.s_mu) / n, static_cast<double>(n),
          2.0 * d - 2.0 * n - pair.s_mu, (d - pair.s_mu) / pair.s_nu};
      break;
  }
  return region;
}

// Largest p ignoring q: the two-branch piecewise formula.
inline double admissible_p_bound(int d, int n, const FrostmanPair& pair) {
  pair.validate(d, n);
  if (pair.s_mu >= 2.0 * d - 3.0 * n)
    return detail::p_of_t(d, n, pair.s_mu, pair.s_nu);
  return detail::p_of_t(d, n, pair.s_mu, std::max(2.0 * n - pair.s_mu, 0.0));
}

struct OptimizeResult {
  // closed-form argmax
  double s_star = 0.0, alpha_star = 0.0, t_star = 0.0, p_star = 0.0;
  // brute-force grid maximum
  double grid_s = 0.0, grid_alpha = 0.0, grid_t = 0.0, grid_p = 0.0;
  double cell_s = 0.0, cell_alpha = 0.0, cell_t = 0.0;
  double value_tolerance = 0.0;  // 1e-6 plus the grid Lipschitz slack
  bool agree = false;
};

// sup over 0 <= s, alpha <= s_mu, 0 <= t <= s_nu, s + t >= 2n of
//   (2n/(n+t)) (1 + (s+t-2n)/(2(d-alpha))),
// returned both in closed form and as a grid scan that must confirm it.
inline OptimizeResult optimize_parameters(int d, int n, const FrostmanPair& pair,
                                          int grid_resolution = 200) {
  // the supremum runs over a closed parameter box, so the boundary pair
  // s_mu + s_nu = 2n is admitted here even though the admissibility bounds need it open
  require(d >= 2 && n >= 1 && n <= d - 1, "optimize_parameters: need 1 <= n <= d-1");
  require(pair.s_nu > 0.0 && pair.s_nu < n,
          "optimize_parameters: s_nu must lie in (0, n)");
  require(pair.s_mu < d && pair.s_mu + pair.s_nu >= 2.0 * n,
          "optimize_parameters: need s_mu < d and s_mu + s_nu >= 2n");
  require(grid_resolution >= 2, "optimize_parameters: resolution >= 2 required");
  OptimizeResult res;
  res.s_star = pair.s_mu;
  res.alpha_star = pair.s_mu;
  res.t_star = pair.s_mu >= 2.0 * d - 3.0 * n ? pair.s_nu
                                              : std::max(2.0 * n - pair.s_mu, 0.0);
  res.p_star = detail::p_of_t(d, n, pair.s_mu, res.t_star);

  const int r = grid_resolution;
  res.cell_s = pair.s_mu / (r - 1);
  res.cell_alpha = pair.s_mu / (r - 1);
  res.cell_t = pair.s_nu / (r - 1);

  const auto objective = [&](double s, double alpha, double t) {
    return 2.0 * n / (n + t) * (1.0 + (s + t - 2.0 * n) / (2.0 * (d - alpha)));
  };

  std::vector<double> best_val(r, -std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> best_idx(r, -1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int is = 0; is < r; ++is) {
    const double s = is * res.cell_s;
    double local_best = -std::numeric_limits<double>::infinity();
    std::int64_t local_idx = -1;
    for (int ia = 0; ia < r; ++ia) {
      const double alpha = ia * res.cell_alpha;
      for (int it = 0; it < r; ++it) {
        const double t = it * res.cell_t;
        if (s + t < 2.0 * n - 1e-9) continue;
        const double val = objective(s, alpha, t);
        // ties break toward larger parameters: on flat directions the
        // supremum convention sits at the upper endpoint
        if (val >= local_best) {
          local_best = val;
          local_idx = static_cast<std::int64_t>(ia) * r + it;
        }
      }
    }
    best_val[is] = local_best;
    best_idx[is] = local_idx;
  }
  int arg_s = 0;
  for (int is = 1; is < r; ++is)
    if (best_val[is] >= best_val[arg_s]) arg_s = is;
  require(best_idx[arg_s] >= 0, "optimize_parameters: empty feasible set on grid");
  const int arg_a = static_cast<int>(best_idx[arg_s] / r);
  const int arg_t = static_cast<int>(best_idx[arg_s] % r);
  res.grid_s = arg_s * res.cell_s;
  res.grid_alpha = arg_a * res.cell_alpha;
  res.grid_t = arg_t * res.cell_t;
  res.grid_p = best_val[arg_s];

  // Lipschitz slack: bounds on the partials over the feasible box.
  const double gap = d - pair.s_mu;
  const double excess = pair.s_mu + pair.s_nu - 2.0 * n;
  const double lip_s = 1.0 / gap;
  const double lip_alpha = std::max(excess, 0.0) / sqr(gap);
  const double lip_t = 2.0 / n * (1.0 + excess / (2.0 * gap)) + 1.0 / gap;
  res.value_tolerance =
      1e-6 + lip_s * res.cell_s + lip_alpha * res.cell_alpha + lip_t * res.cell_t;

  res.agree = std::abs(res.grid_s - res.s_star) <= res.cell_s + 1e-12 &&
              std::abs(res.grid_alpha - res.alpha_star) <= res.cell_alpha + 1e-12 &&
              std::abs(res.grid_t - res.t_star) <= res.cell_t + 1e-12 &&
              std::abs(res.grid_p - res.p_star) <= res.value_tolerance;
  return res;
}

// --- plane visibility thresholds ---------------------------------------------

struct ExceptionalBound {
  double value = 0.0;
  bool boundary = false;  // denominator vanished
};

struct VisibilityReport {
  int d = 2;
  int m = 1;
  double threshold_i = 0.0;
  std::optional<double> threshold_ii;  // applies only when m > d/2

  ExceptionalBound exceptional_bound(double dim_e) const {
    const double first = 2.0 * (d - m) - dim_e;
    const double denom = (d - m) - m * (d - dim_e);
    if (denom == 0.0) return ExceptionalBound{std::max(first, 0.0), true};
    const double second = (d - m) * (dim_e - 2.0 * m + m * (d - dim_e)) / denom;
    return ExceptionalBound{std::max({first, second, 0.0}), false};
  }
};

inline VisibilityReport visibility_thresholds(int d, int m) {
  require(d >= 2 && m >= 1 && m <= d - 1, "visibility_thresholds: need 1 <= m <= d-1");
  VisibilityReport rep;
  rep.d = d;
  rep.m = m;
  rep.threshold_i = std::max(d - static_cast<double>(m) / (2.0 * m - 1.0),
                             static_cast<double>(3 * m - d));
  if (2 * m > d)
    rep.threshold_ii = std::max(2.0 * (d - m),
                                d - static_cast<double>(2 * m - d) / (m - 1));
  return rep;
}

// q = 2 + (s - n)/(d - alpha); at alpha = s this is (2d - n - s)/(d - s).
inline double dov_exponent(int d, int n, double s, double alpha) {
  require(n >= 1 && n <= d - 1, "dov_exponent: need 1 <= n <= d-1");
  require(s >= n && s < d, "dov_exponent: need n <= s < d");
  require(alpha > 0.0 && alpha < d, "dov_exponent: alpha must lie in (0, d)");
  return 2.0 + (s - n) / (d - alpha);
}

// Sobolev-embedding region: n/p + (2d-2n-s)/q > d-s for 2 <= q <= p (p may be
// +infinity).
inline bool sobolev_region(int d, int n, double s, double p, double q) {
  require(q >= 2.0, "sobolev_region: q must be >= 2");
  require(q <= p, "sobolev_region: q must not exceed p");
  const double lhs = (std::isinf(p) ? 0.0 : n / p) + (2.0 * d - 2.0 * n - s) / q;
  return lhs > d - s;
}

// --- jump-discontinuity figure -------------------------------------------------

struct JumpFigurePoint {
  double s_mu = 0.0, s_nu = 0.0;
  bool feasible = false;
  double p_max = 1.0;  // 1 when only the trivial exponent survives
};

struct JumpSegmentPoint {
  double s_mu = 0.0, s_nu = 0.0;
  double p_limit = 1.0;  // one-sided limit 2n/(3n - s_mu) from the feasible side
};

struct JumpFigure {
  int d = 2, n = 1;
  std::vector<std::array<double, 2>> polygon;  // feasible-region boundary
  std::vector<JumpFigurePoint> grid;
  std::vector<JumpSegmentPoint> segment;
};

inline JumpFigure jump_figure_data(int d, int n, int resolution) {
  require(d >= 2 && n >= 1 && n <= d - 1, "jump_figure_data: need 1 <= n <= d-1");
  require(resolution >= 8, "jump_figure_data: resolution >= 8 required");
  JumpFigure fig;
  fig.d = d;
  fig.n = n;

  const double nn = n, dd = d;
  if (2 * n > d) {
    fig.polygon = {{nn, nn}, {dd, 2.0 * nn - dd}, {dd, nn}};
  } else if (2 * n == d) {
    fig.polygon = {{nn, nn}, {dd, 0.0}, {dd, nn}};
  } else {
    fig.polygon = {{nn, nn}, {2.0 * nn, 0.0}, {dd, 0.0}, {dd, nn}};
  }

  fig.grid.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    const double s_mu = (i + 0.5) * dd / resolution;
    for (int j = 0; j < resolution; ++j) {
      const double s_nu = (j + 0.5) * nn / resolution;
      JumpFigurePoint pt;
      pt.s_mu = s_mu;
      pt.s_nu = s_nu;
      pt.feasible = s_nu > 0.0 && s_nu < nn && s_mu > 2.0 * nn - s_nu && s_mu < dd;
      pt.p_max = pt.feasible ? admissible_p_bound(d, n, FrostmanPair{s_mu, s_nu}) : 1.0;
      fig.grid.push_back(pt);
    }
  }

  // the critical segment s_mu + s_nu = 2n, 0 < s_nu < n
  const double seg_lo = nn;                  // s_mu at (n, n)
  const double seg_hi = std::min(2.0 * nn, dd);  // s_mu where the segment exits
  fig.segment.reserve(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double s_mu = seg_lo + (i + 0.5) * (seg_hi - seg_lo) / resolution;
    JumpSegmentPoint sp;
    sp.s_mu = s_mu;
    sp.s_nu = 2.0 * nn - s_mu;
    sp.p_limit = 2.0 * nn / (3.0 * nn - s_mu);
    fig.segment.push_back(sp);
  }
  return fig;
}

}  // namespace frostlab
