// Pushforwards under orthogonal projection, radial-slice values, mixed norms
// over Grassmannian samples, and the identity checks built on them.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/gamma.hpp"
#include "frostlab/grassmann.hpp"
#include "frostlab/measure.hpp"
#include "frostlab/rng.hpp"

namespace frostlab {

// Radial cutoff psi: 1 on [0, 0.7 R], smooth fall to 0 at R. The default
// R = 1.5 x support radius keeps the support strictly inside the flat core.
inline double cutoff_psi(double r, double radius) {
  const double t = r / radius;
  if (t <= 0.7) return 1.0;
  if (t >= 1.0) return 0.0;
  const auto q = [](double v) { return v > 0.0 ? std::exp(-1.0 / v) : 0.0; };
  const double u = (t - 0.7) / 0.3;
  return q(1.0 - u) / (q(1.0 - u) + q(u));
}

struct ProjectedDensity {
  Frame frame;
  Eigen::VectorXd origin;  // n-dim grid corner
  double h = 0.0;
  std::vector<std::int64_t> shape;
  std::vector<double> values;  // row-major, one per cell
  double bandwidth = 0.0;
  double cutoff_radius = 0.0;

  int n() const { return frame.subspace_dim; }

  double cell_volume() const { return std::pow(h, n()); }

  double integral() const { return pairwise_sum(values) * cell_volume(); }

  double coord(int axis, std::int64_t i) const {
    return origin[axis] + (static_cast<double>(i) + 0.5) * h;
  }

  std::int64_t cell_count() const { return static_cast<std::int64_t>(values.size()); }

  // Multilinear interpolation between the 2^n neighboring cells.
  double value_at(const Eigen::VectorXd& u) const {
    const int nn = n();
    require(u.size() == nn, "ProjectedDensity: point dimension mismatch");
    std::vector<std::int64_t> base(nn);
    std::vector<double> frac(nn);
    for (int a = 0; a < nn; ++a) {
      const double t = (u[a] - origin[a]) / h - 0.5;
      const double fl = std::floor(t);
      base[a] = static_cast<std::int64_t>(fl);
      frac[a] = t - fl;
      require(base[a] >= 0 && base[a] + 1 < shape[a],
              "ProjectedDensity: point outside the projected grid");
    }
    std::vector<std::int64_t> strides(nn);
    {
      std::int64_t acc = 1;
      for (int a = nn - 1; a >= 0; --a) {
        strides[a] = acc;
        acc *= shape[a];
      }
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << nn); ++corner) {
      double wgt = 1.0;
      std::int64_t flat = 0;
      for (int a = 0; a < nn; ++a) {
        const bool hi = corner & (1 << a);
        wgt *= hi ? frac[a] : 1.0 - frac[a];
        flat += (base[a] + (hi ? 1 : 0)) * strides[a];
      }
      acc += wgt * values[flat];
    }
    return acc;
  }
};

// Binned kernel density of pi_V mu: atoms projected to frame coordinates,
// weighted by the radial cutoff, smoothed by a truncated gaussian
// (sigma = bandwidth, cut at 3 sigma) normalized per atom on the grid.
inline ProjectedDensity pushforward_density(
    const DiscreteMeasure& mu, const Frame& v, double h_V, double bandwidth,
    double psi_radius, const std::vector<Eigen::VectorXd>& cover_points = {}) {
  require(v.ambient_dim == mu.dim, "pushforward_density: frame/measure dim mismatch");
  require(h_V > 0.0 && bandwidth >= h_V,
          "pushforward_density: need bandwidth >= h_V > 0");
  require(psi_radius >= 1.5 * mu.support_radius() * (1.0 - 1e-12),
          "pushforward_density: psi radius below 1.5 x support radius");
  const int n = v.subspace_dim;
  const std::int64_t atoms = mu.atom_count();

  Eigen::MatrixXd u = mu.positions * v.basis;  // atoms x n
  Eigen::VectorXd wpsi(atoms);
  for (std::int64_t i = 0; i < atoms; ++i)
    wpsi[i] = mu.weights[i] * cutoff_psi(mu.positions.row(i).norm(), psi_radius);

  const double cut = 3.0 * bandwidth;
  Eigen::VectorXd lo = u.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = u.colwise().maxCoeff().transpose();
  for (const auto& pt : cover_points) {
    require(pt.size() == n, "pushforward_density: cover point dimension mismatch");
    lo = lo.cwiseMin(pt);
    hi = hi.cwiseMax(pt);
  }

  ProjectedDensity rho;
  rho.frame = v;
  rho.h = h_V;
  rho.bandwidth = bandwidth;
  rho.cutoff_radius = psi_radius;
  rho.origin = Eigen::VectorXd(n);
  rho.shape.resize(n);
  std::int64_t total = 1;
  for (int a = 0; a < n; ++a) {
    rho.origin[a] = lo[a] - cut - 2.0 * h_V;
    const double top = hi[a] + cut + 2.0 * h_V;
    rho.shape[a] = std::max<std::int64_t>(
        2, static_cast<std::int64_t>(std::ceil((top - rho.origin[a]) / h_V)));
    total *= rho.shape[a];
  }
  rho.values.assign(total, 0.0);

  std::vector<std::int64_t> strides(n);
  {
    std::int64_t acc = 1;
    for (int a = n - 1; a >= 0; --a) {
      strides[a] = acc;
      acc *= rho.shape[a];
    }
  }
  std::vector<std::int64_t> idx_lo(n), idx_hi(n), idx(n);
  std::vector<std::int64_t> touched;
  std::vector<double> kv;
  for (std::int64_t i = 0; i < atoms; ++i) {
    if (wpsi[i] == 0.0) continue;
    for (int a = 0; a < n; ++a) {
      idx_lo[a] = std::max<std::int64_t>(
          0, static_cast<std::int64_t>(std::ceil((u(i, a) - cut - rho.origin[a]) / h_V - 0.5)));
      idx_hi[a] = std::min<std::int64_t>(
          rho.shape[a] - 1,
          static_cast<std::int64_t>(std::floor((u(i, a) + cut - rho.origin[a]) / h_V - 0.5)));
    }
    touched.clear();
    kv.clear();
    idx = idx_lo;
    double ksum = 0.0;
    while (true) {
      double r2 = 0.0;
      std::int64_t flat = 0;
      for (int a = 0; a < n; ++a) {
        r2 += sqr(rho.coord(a, idx[a]) - u(i, a));
        flat += idx[a] * strides[a];
      }
      if (r2 <= cut * cut) {
        const double k = std::exp(-0.5 * r2 / sqr(bandwidth));
        touched.push_back(flat);
        kv.push_back(k);
        ksum += k;
      }
      int axis = n - 1;
      while (axis >= 0 && ++idx[axis] > idx_hi[axis]) {
        idx[axis] = idx_lo[axis];
        --axis;
      }
      if (axis < 0) break;
    }
    require(ksum > 0.0, "pushforward_density: empty binning stencil");
    const double scale = wpsi[i] / (ksum * rho.cell_volume());
    for (std::size_t t = 0; t < touched.size(); ++t)
      rho.values[touched[t]] += kv[t] * scale;
  }
  return rho;
}

inline double lp_norm(const ProjectedDensity& rho, double p) {
  require(p >= 1.0, "lp_norm: p must be >= 1");
  std::vector<double> terms(rho.values.size());
  for (std::size_t i = 0; i < rho.values.size(); ++i)
    terms[i] = std::pow(std::abs(rho.values[i]), p);
  return std::pow(pairwise_sum(terms) * rho.cell_volume(), 1.0 / p);
}

// pi_V mu evaluated at pi_V y: the mass density of mu on the plane y + V-perp.
inline double radial_slice(const DiscreteMeasure& mu, const Eigen::VectorXd& y,
                           const Frame& v, double bandwidth,
                           double h_V = 0.0, double psi_radius = 0.0) {
  require(y.size() == mu.dim, "radial_slice: point dimension mismatch");
  if (h_V <= 0.0) h_V = 0.5 * bandwidth;  // bandwidth = 2 grid cells
  if (psi_radius <= 0.0)
    psi_radius = std::max(1.5 * mu.support_radius(), 1.5 * y.norm());
  const Eigen::VectorXd py = v.basis.transpose() * y;
  const ProjectedDensity rho =
      pushforward_density(mu, v, h_V, bandwidth, psi_radius, {py});
  return rho.value_at(py);
}

namespace detail {

// Slice values for every (target point, frame) pair, sharing one binned
// density per frame. Column j is written independently, so the table is
// identical for any thread count.
inline Eigen::MatrixXd slice_table(const DiscreteMeasure& mu,
                                   const std::vector<Eigen::VectorXd>& ys,
                                   const GrassmannSample& g, double bandwidth,
                                   double h_V, double psi_radius) {
  const std::int64_t ny = static_cast<std::int64_t>(ys.size());
  const std::int64_t nf = g.count();
  Eigen::MatrixXd table(ny, nf);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t j = 0; j < nf; ++j) {
    const Frame& v = g.frames[j];
    std::vector<Eigen::VectorXd> cover;
    cover.reserve(ys.size());
    for (const auto& y : ys) cover.push_back(v.basis.transpose() * y);
    const ProjectedDensity rho =
        pushforward_density(mu, v, h_V, bandwidth, psi_radius, cover);
    for (std::int64_t i = 0; i < ny; ++i) table(i, j) = rho.value_at(cover[i]);
  }
  return table;
}

inline double min_support_distance(const DiscreteMeasure& mu,
                                   const DiscreteMeasure& nu) {
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < mu.atom_count(); ++i)
    for (std::int64_t j = 0; j < nu.atom_count(); ++j)
      best = std::min(best, (mu.positions.row(i) - nu.positions.row(j)).norm());
  return best;
}

inline double mean_pairwise(const Eigen::VectorXd& col) {
  std::vector<double> v(col.data(), col.data() + col.size());
  return pairwise_sum(v) / static_cast<double>(col.size());
}

}  // namespace detail

struct MixedNormReport {
  double p = 1.0, q = 1.0;
  double value = 0.0;
  double stderr_estimate = 0.0;
  std::int64_t grassmann_count = 0;
  std::int64_t nu_sample_count = 0;
  std::uint64_t seed = 0;
  double bandwidth = 0.0;
};

// int ( mean_V |pi^y mu(V)|^p )^{q/p} d nu(y) over the Grassmann sample, with
// a batch-means standard error over frame groups.
inline MixedNormReport mixed_norm(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  double p, double q, const GrassmannSample& g,
                                  double bandwidth, double h_V = 0.0,
                                  double psi_radius = 0.0) {
  require(p >= 1.0 && q >= 1.0, "mixed_norm: need p, q >= 1");
  require(mu.dim == nu.dim, "mixed_norm: dimension mismatch");
  require(g.count() >= 1, "mixed_norm: empty Grassmann sample");
  require(detail::min_support_distance(mu, nu) >= 2.0 * bandwidth,
          "mixed_norm: supports must be separated by at least 2 x bandwidth");
  if (h_V <= 0.0) h_V = 0.5 * bandwidth;
  if (psi_radius <= 0.0)
    psi_radius = 1.5 * std::max(mu.support_radius(), nu.support_radius());

  std::vector<Eigen::VectorXd> ys;
  ys.reserve(nu.atom_count());
  for (std::int64_t i = 0; i < nu.atom_count(); ++i)
    ys.push_back(nu.positions.row(i).transpose());
  const Eigen::MatrixXd table =
      detail::slice_table(mu, ys, g, bandwidth, h_V, psi_radius);

  const std::int64_t nf = g.count();
  const auto value_over = [&](std::int64_t f0, std::int64_t f1) {
    std::vector<double> per_y(ys.size());
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(ys.size()); ++i) {
      std::vector<double> powed(f1 - f0);
      for (std::int64_t j = f0; j < f1; ++j)
        powed[j - f0] = std::pow(std::abs(table(i, j)), p);
      const double lp =
          std::pow(pairwise_sum(powed) / static_cast<double>(f1 - f0), 1.0 / p);
      per_y[i] = nu.weights[i] * std::pow(lp, q);
    }
    return pairwise_sum(per_y);
  };

  MixedNormReport rep;
  rep.p = p;
  rep.q = q;
  rep.value = value_over(0, nf);
  rep.grassmann_count = nf;
  rep.nu_sample_count = nu.atom_count();
  rep.seed = g.seed;
  rep.bandwidth = bandwidth;

  const int batches = nf >= 8 ? 8 : static_cast<int>(nf);
  if (batches >= 2) {
    std::vector<double> bv(batches);
    for (int b = 0; b < batches; ++b)
      bv[b] = value_over(b * nf / batches, (b + 1) * nf / batches);
    double mean = pairwise_sum(bv) / batches;
    double var = 0.0;
    for (double x : bv) var += sqr(x - mean);
    var /= (batches - 1);
    rep.stderr_estimate = std::sqrt(var / batches);
  }
  return rep;
}

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_error = 0.0;
  // the same right side evaluated without any grid (exact kernel sums);
  // carries the binning and interpolation error of the slice machinery
  double kernel_rhs = 0.0;
  double kernel_relative_error = 0.0;
};

namespace detail {

// Exact (grid-free) gaussian density of projected atoms at a point; the
// independent evaluation path for the projection identity.
inline double direct_projected_density(const Eigen::MatrixXd& u,
                                       const Eigen::VectorXd& wpsi,
                                       const Eigen::VectorXd& at, double bandwidth,
                                       double norm_factor) {
  const double cut2 = sqr(3.0 * bandwidth);
  double acc = 0.0;
  for (std::int64_t i = 0; i < u.rows(); ++i) {
    const double r2 = (u.row(i).transpose() - at).squaredNorm();
    if (r2 <= cut2) acc += wpsi[i] * std::exp(-0.5 * r2 / sqr(bandwidth));
  }
  return acc / norm_factor;
}

}  // namespace detail

// Orponen's formula: int ||pi^y mu||_p^p d nu = int ||pi_V mu||^p_{L^p(pi_V nu)} d gamma.
// Left side: the mixed-norm path (per y, then averaged over frames). Right
// side: per frame, the binned density evaluated at every projected nu-atom and
// averaged afterwards. Matched bandwidth and grid make the identity exact up
// to Monte Carlo and binning error. kernel_rhs re-evaluates the right side
// with exact kernel sums and no grid, exposing the binning error itself.
inline IdentityCheck orponen_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double p, const GrassmannSample& g,
                                   double bandwidth, double h_V = 0.0,
                                   double psi_radius = 0.0) {
  if (h_V <= 0.0) h_V = 0.5 * bandwidth;
  if (psi_radius <= 0.0)
    psi_radius = 1.5 * std::max(mu.support_radius(), nu.support_radius());
  IdentityCheck out;
  out.lhs = mixed_norm(mu, nu, p, p, g, bandwidth, h_V, psi_radius).value;

  const int n = g.subspace_dim;
  const std::int64_t nf = g.count();

  // right side, binned path: its own frame-major loop over fresh densities
  {
    std::vector<double> per_frame(nf);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < nf; ++j) {
      const Frame& v = g.frames[j];
      std::vector<Eigen::VectorXd> cover;
      cover.reserve(nu.atom_count());
      for (std::int64_t i = 0; i < nu.atom_count(); ++i)
        cover.push_back(v.basis.transpose() * nu.positions.row(i).transpose());
      const ProjectedDensity rho =
          pushforward_density(mu, v, h_V, bandwidth, psi_radius, cover);
      std::vector<double> per_y(nu.atom_count());
      for (std::int64_t i = 0; i < nu.atom_count(); ++i)
        per_y[i] = nu.weights[i] * std::pow(rho.value_at(cover[i]), p);
      per_frame[j] = pairwise_sum(per_y);
    }
    out.rhs = pairwise_sum(per_frame) / static_cast<double>(nf);
  }

  // right side, grid-free path: truncated gaussian kernel sums
  {
    const double norm_factor =
        std::pow(2.0 * std::numbers::pi * sqr(bandwidth), 0.5 * n) *
        regularized_gamma_p(0.5 * n, 4.5);
    Eigen::VectorXd wpsi(mu.atom_count());
    for (std::int64_t i = 0; i < mu.atom_count(); ++i)
      wpsi[i] = mu.weights[i] * cutoff_psi(mu.positions.row(i).norm(), psi_radius);
    std::vector<double> per_frame(nf);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < nf; ++j) {
      const Frame& v = g.frames[j];
      const Eigen::MatrixXd umu = mu.positions * v.basis;
      const Eigen::MatrixXd unu = nu.positions * v.basis;
      std::vector<double> per_y(nu.atom_count());
      for (std::int64_t i = 0; i < nu.atom_count(); ++i) {
        const double dens = detail::direct_projected_density(
            umu, wpsi, unu.row(i).transpose(), bandwidth, norm_factor);
        per_y[i] = nu.weights[i] * std::pow(dens, p);
      }
      per_frame[j] = pairwise_sum(per_y);
    }
    out.kernel_rhs = pairwise_sum(per_frame) / static_cast<double>(nf);
  }

  out.relative_error = std::abs(out.lhs - out.rhs) /
                       std::max({std::abs(out.lhs), std::abs(out.rhs), 1e-300});
  out.kernel_relative_error =
      std::abs(out.lhs - out.kernel_rhs) /
      std::max({std::abs(out.lhs), std::abs(out.kernel_rhs), 1e-300});
  return out;
}

struct RadialAverageResult {
  double lhs = 0.0;   // Monte Carlo average of the slice value
  double rhs = 0.0;   // (|S^{n-1}|/|S^{d-1}|) int |x-y|^{n-d} d mu(x)
  double ratio = 0.0;
};

inline RadialAverageResult average_radial(const DiscreteMeasure& mu,
                                          const Eigen::VectorXd& y, int n,
                                          const GrassmannSample& g, double bandwidth,
                                          double h_V = 0.0, double psi_radius = 0.0) {
  require(g.subspace_dim == n, "average_radial: sample subspace dim != n");
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < mu.atom_count(); ++i)
    min_dist = std::min(min_dist, (mu.positions.row(i).transpose() - y).norm());
  require(min_dist >= 2.0 * bandwidth,
          "average_radial: y must be at least 2 x bandwidth away from supp mu");
  if (h_V <= 0.0) h_V = 0.5 * bandwidth;
  if (psi_radius <= 0.0)
    psi_radius = std::max(1.5 * mu.support_radius(), 1.5 * y.norm() + 1.0);

  const Eigen::MatrixXd table =
      detail::slice_table(mu, {y}, g, bandwidth, h_V, psi_radius);
  RadialAverageResult res;
  res.lhs = detail::mean_pairwise(table.row(0).transpose());

  std::vector<double> terms(mu.atom_count());
  for (std::int64_t i = 0; i < mu.atom_count(); ++i)
    terms[i] = mu.weights[i] *
               std::pow((mu.positions.row(i).transpose() - y).norm(), n - mu.dim);
  res.rhs = sphere_surface(n) / sphere_surface(mu.dim) * pairwise_sum(terms);
  res.ratio = res.lhs / res.rhs;
  return res;
}

// Monte Carlo estimate of the gamma_{d,m} mass of planes spanned by m-tuples
// of atoms seen from y: the fraction of a reference Grassmann sample within
// resolution_angle (max principal angle) of some sampled spanned plane.
inline double plane_coverage(const DiscreteMeasure& e_atoms, const Eigen::VectorXd& y,
                             int m, std::int64_t trials, std::uint64_t seed,
                             double resolution_angle, std::int64_t ref_count = 512) {
  const int d = e_atoms.dim;
  require(m >= 1 && m <= d - 1, "plane_coverage: need 1 <= m <= d-1");
  require(trials >= 1, "plane_coverage: trials >= 1 required");
  require(resolution_angle > 0.0, "plane_coverage: resolution angle must be > 0");

  // cumulative weights for inverse-transform sampling
  std::vector<double> cdf(e_atoms.atom_count());
  double acc = 0.0;
  for (std::int64_t i = 0; i < e_atoms.atom_count(); ++i) {
    acc += e_atoms.weights[i];
    cdf[i] = acc;
  }

  std::vector<Frame> spanned;
  spanned.reserve(trials);
  std::int64_t degenerate = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    std::vector<Eigen::VectorXd> xs(m);
    for (int j = 0; j < m; ++j) {
      const double target = rng.next_unit() * acc;
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
      const std::int64_t idx = std::min<std::int64_t>(
          static_cast<std::int64_t>(it - cdf.begin()), e_atoms.atom_count() - 1);
      xs[j] = e_atoms.positions.row(idx).transpose();
    }
    try {
      spanned.push_back(span_plane(y, xs));
    } catch (const DegeneracyError&) {
      ++degenerate;
    }
  }
  if (spanned.empty())
    throw PreconditionError("plane_coverage: every sampled tuple was degenerate");

  const GrassmannSample ref =
      sample_grassmann(d, m, ref_count, derive_seed(seed, 0x5eedUL));
  std::int64_t hit = 0;
  for (const auto& v : ref.frames) {
    for (const auto& w : spanned) {
      if (max_principal_angle(v, w) <= resolution_angle) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(ref_count);
}

}  // namespace frostlab
