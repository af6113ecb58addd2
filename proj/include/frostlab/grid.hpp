// Regular d-dimensional complex grids, binary container io, and mollification
// of atom clouds onto grids.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/measure.hpp"

namespace frostlab {

struct GridField {
  int dim = 0;
  Eigen::VectorXd origin;          // corner of cell (0,...,0)
  double h = 0.0;                  // uniform spacing
  std::vector<std::int64_t> shape;
  std::vector<cplx> samples;       // row-major, value at cell centers

  GridField() = default;
  GridField(int d, Eigen::VectorXd orig, double spacing,
            std::vector<std::int64_t> extents)
      : dim(d), origin(std::move(orig)), h(spacing), shape(std::move(extents)) {
    require(dim >= 1 && origin.size() == dim, "GridField: bad origin");
    require(h > 0.0, "GridField: spacing must be positive");
    require(static_cast<int>(shape.size()) == dim, "GridField: bad shape rank");
    std::int64_t total = 1;
    for (auto e : shape) {
      require(e >= 2, "GridField: each extent must be >= 2");
      total *= e;
    }
    samples.assign(total, cplx{0.0, 0.0});
  }

  std::int64_t cell_count() const { return static_cast<std::int64_t>(samples.size()); }

  std::vector<std::int64_t> strides() const {
    std::vector<std::int64_t> st(dim);
    std::int64_t acc = 1;
    for (int a = dim - 1; a >= 0; --a) {
      st[a] = acc;
      acc *= shape[a];
    }
    return st;
  }

  std::int64_t flat_index(const std::vector<std::int64_t>& idx) const {
    std::int64_t flat = 0;
    for (int a = 0; a < dim; ++a) flat = flat * shape[a] + idx[a];
    return flat;
  }

  std::vector<std::int64_t> multi_index(std::int64_t flat) const {
    std::vector<std::int64_t> idx(dim);
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = flat % shape[a];
      flat /= shape[a];
    }
    return idx;
  }

  double coord(int axis, std::int64_t i) const {
    return origin[axis] + (static_cast<double>(i) + 0.5) * h;
  }

  Eigen::VectorXd cell_center(std::int64_t flat) const {
    const auto idx = multi_index(flat);
    Eigen::VectorXd x(dim);
    for (int a = 0; a < dim; ++a) x[a] = coord(a, idx[a]);
    return x;
  }

  double cell_volume() const { return std::pow(h, dim); }

  cplx integral() const { return pairwise_sum(samples) * cell_volume(); }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : samples) m = std::max(m, std::abs(v));
    return m;
  }

  // Largest |sample| over cells touching the grid boundary.
  double boundary_max_abs() const {
    double m = 0.0;
    for (std::int64_t f = 0; f < cell_count(); ++f) {
      const auto idx = multi_index(f);
      bool edge = false;
      for (int a = 0; a < dim; ++a)
        if (idx[a] == 0 || idx[a] == shape[a] - 1) edge = true;
      if (edge) m = std::max(m, std::abs(samples[f]));
    }
    return m;
  }

  bool is_nonnegative(double tol = 0.0) const {
    for (const auto& v : samples)
      if (v.imag() != 0.0 || v.real() < -tol) return false;
    return true;
  }
};

// --- binary container --------------------------------------------------------
// Header: d, origin[d], h, shape[d], all little-endian 64-bit (ints unsigned,
// reals IEEE doubles), then row-major samples as (real, imag) doubles.

namespace detail {
inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}
inline void put_f64(std::ostream& os, double x) {
  std::uint64_t v;
  std::memcpy(&v, &x, 8);
  put_u64(os, v);
}
inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  require(is.good(), "GridField io: truncated input");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
inline double get_f64(std::istream& is) {
  const std::uint64_t v = get_u64(is);
  double x;
  std::memcpy(&x, &v, 8);
  return x;
}
}  // namespace detail

inline void write_grid_field(const GridField& f, std::ostream& os) {
  detail::put_u64(os, static_cast<std::uint64_t>(f.dim));
  for (int a = 0; a < f.dim; ++a) detail::put_f64(os, f.origin[a]);
  detail::put_f64(os, f.h);
  for (int a = 0; a < f.dim; ++a)
    detail::put_u64(os, static_cast<std::uint64_t>(f.shape[a]));
  for (const auto& v : f.samples) {
    detail::put_f64(os, v.real());
    detail::put_f64(os, v.imag());
  }
}

inline void write_grid_field(const GridField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "write_grid_field: cannot open " + path);
  write_grid_field(f, os);
}

inline GridField read_grid_field(std::istream& is) {
  const int d = static_cast<int>(detail::get_u64(is));
  require(d >= 1 && d <= 16, "read_grid_field: implausible dimension");
  Eigen::VectorXd origin(d);
  for (int a = 0; a < d; ++a) origin[a] = detail::get_f64(is);
  const double h = detail::get_f64(is);
  std::vector<std::int64_t> shape(d);
  for (int a = 0; a < d; ++a) shape[a] = static_cast<std::int64_t>(detail::get_u64(is));
  GridField f(d, std::move(origin), h, std::move(shape));
  for (auto& v : f.samples) {
    const double re = detail::get_f64(is);
    const double im = detail::get_f64(is);
    v = cplx{re, im};
  }
  return f;
}

inline GridField read_grid_field_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "read_grid_field: cannot open " + path);
  return read_grid_field(is);
}

// --- mollification ------------------------------------------------------------

struct MollifierSpec {
  enum class Profile { gaussian, compact_bump };
  double bandwidth = 0.0;  // delta
  Profile profile = Profile::gaussian;

  // gaussian: std deviation delta, truncated at 3 delta (renormalized on-grid);
  // compact bump: support radius delta.
  double cutoff() const {
    return profile == Profile::gaussian ? 3.0 * bandwidth : bandwidth;
  }

  double value(double r) const {
    if (profile == Profile::gaussian)
      return r <= cutoff() ? std::exp(-0.5 * sqr(r / bandwidth)) : 0.0;
    const double u = r / bandwidth;
    return u < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
  }

  void validate() const {
    require(bandwidth > 0.0, "MollifierSpec: bandwidth must be positive");
  }
};

struct GridSpec {
  Eigen::VectorXd origin;
  double h = 0.0;
  std::vector<std::int64_t> shape;
};

// mu^delta = phi_delta * mu sampled at cell centers. Each atom's stencil is
// normalized on-grid so the total integral equals the atom's weight exactly.
inline GridField mollify(const DiscreteMeasure& mu, const MollifierSpec& moll,
                         const GridSpec& gs) {
  moll.validate();
  const double delta = moll.bandwidth;
  require(gs.h > 0.0 && gs.h <= 0.5 * delta + 1e-15,
          "mollify: grid spacing must satisfy h <= delta/2");
  GridField field(mu.dim, gs.origin, gs.h, gs.shape);

  // grid must cover support plus a 3 delta margin
  const Eigen::VectorXd lo = mu.box_min();
  const Eigen::VectorXd hi = mu.box_max();
  for (int a = 0; a < mu.dim; ++a) {
    const double grid_lo = gs.origin[a];
    const double grid_hi = gs.origin[a] + gs.h * static_cast<double>(gs.shape[a]);
    require(lo[a] - 3.0 * delta >= grid_lo - 1e-12 &&
                hi[a] + 3.0 * delta <= grid_hi + 1e-12,
            "mollify: grid does not cover support plus 3*delta margin");
  }

  const double cut = moll.cutoff();
  const auto strides = field.strides();
  std::vector<std::int64_t> idx_lo(mu.dim), idx_hi(mu.dim), idx(mu.dim);
  std::vector<std::int64_t> touched;
  std::vector<double> kv;
  for (std::int64_t i = 0; i < mu.atom_count(); ++i) {
    const Eigen::VectorXd x = mu.positions.row(i).transpose();
    std::int64_t cells = 1;
    for (int a = 0; a < mu.dim; ++a) {
      idx_lo[a] = static_cast<std::int64_t>(
          std::ceil((x[a] - cut - gs.origin[a]) / gs.h - 0.5));
      idx_hi[a] = static_cast<std::int64_t>(
          std::floor((x[a] + cut - gs.origin[a]) / gs.h - 0.5));
      idx_lo[a] = std::max<std::int64_t>(idx_lo[a], 0);
      idx_hi[a] = std::min<std::int64_t>(idx_hi[a], gs.shape[a] - 1);
      require(idx_lo[a] <= idx_hi[a], "mollify: empty stencil (grid too coarse)");
      cells *= idx_hi[a] - idx_lo[a] + 1;
    }
    touched.clear();
    kv.clear();
    touched.reserve(cells);
    kv.reserve(cells);
    idx = idx_lo;
    double ksum = 0.0;
    while (true) {
      double r2 = 0.0;
      std::int64_t flat = 0;
      for (int a = 0; a < mu.dim; ++a) {
        r2 += sqr(field.coord(a, idx[a]) - x[a]);
        flat += idx[a] * strides[a];
      }
      const double k = moll.value(std::sqrt(r2));
      if (k > 0.0) {
        touched.push_back(flat);
        kv.push_back(k);
        ksum += k;
      }
      int axis = mu.dim - 1;
      while (axis >= 0 && ++idx[axis] > idx_hi[axis]) {
        idx[axis] = idx_lo[axis];
        --axis;
      }
      if (axis < 0) break;
    }
    require(ksum > 0.0, "mollify: kernel vanished on the stencil");
    const double scale = mu.weights[i] / (ksum * field.cell_volume());
    for (std::size_t t = 0; t < touched.size(); ++t)
      field.samples[touched[t]] += kv[t] * scale;
  }
  return field;
}

// Smallest grid covering the support with the margin required by mollify.
inline GridSpec default_grid_for(const DiscreteMeasure& mu, double delta, double h,
                                 double margin_factor = 3.0) {
  GridSpec gs;
  gs.h = h;
  const Eigen::VectorXd lo = mu.box_min();
  const Eigen::VectorXd hi = mu.box_max();
  gs.origin = Eigen::VectorXd(mu.dim);
  gs.shape.resize(mu.dim);
  for (int a = 0; a < mu.dim; ++a) {
    gs.origin[a] = lo[a] - margin_factor * delta - h;
    const double top = hi[a] + margin_factor * delta + h;
    gs.shape[a] = std::max<std::int64_t>(
        2, static_cast<std::int64_t>(std::ceil((top - gs.origin[a]) / h)));
  }
  return gs;
}

}  // namespace frostlab
