// G(d,n) sampling under the rotation-invariant measure, orthogonal projection,
// spanned planes, and principal angles.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "frostlab/core.hpp"
#include "frostlab/rng.hpp"

namespace frostlab {

struct Frame {
  int ambient_dim = 0;
  int subspace_dim = 0;
  Eigen::MatrixXd basis;  // d x n, orthonormal columns

  Frame() = default;
  Frame(int d, int n, Eigen::MatrixXd b)
      : ambient_dim(d), subspace_dim(n), basis(std::move(b)) {
    validate();
  }

  void validate() const {
    require(ambient_dim >= 1 && subspace_dim >= 1 && subspace_dim <= ambient_dim,
            "Frame: need 1 <= n <= d");
    require(basis.rows() == ambient_dim && basis.cols() == subspace_dim,
            "Frame: basis must be d x n");
    const Eigen::MatrixXd gram =
        basis.transpose() * basis - Eigen::MatrixXd::Identity(subspace_dim, subspace_dim);
    require(gram.cwiseAbs().maxCoeff() <= 1e-10, "Frame: columns not orthonormal");
  }

  // Completion: columns n+1..d of an orthonormal basis of R^d (a basis of the
  // orthogonal complement).
  Eigen::MatrixXd complement() const {
    Eigen::MatrixXd full(ambient_dim, ambient_dim);
    full.leftCols(subspace_dim) = basis;
    int have = subspace_dim;
    for (int e = 0; e < ambient_dim && have < ambient_dim; ++e) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(ambient_dim, e);
      for (int c = 0; c < have; ++c) v -= full.col(c).dot(v) * full.col(c);
      for (int c = 0; c < have; ++c) v -= full.col(c).dot(v) * full.col(c);
      const double norm = v.norm();
      if (norm > 1e-8) full.col(have++) = v / norm;
    }
    require(have == ambient_dim, "Frame: failed to complete basis");
    return full.rightCols(ambient_dim - subspace_dim);
  }
};

// Haar-distributed d x d orthogonal matrix: QR of an iid standard-normal array
// with each Q column flipped to make the matching R diagonal entry positive.
// Without the sign fix the factorization convention skews the distribution.
inline Eigen::MatrixXd haar_orthogonal(int d, CounterRng& rng) {
  require(d >= 1, "haar_orthogonal: d >= 1 required");
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.next_gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

struct GrassmannSample {
  int ambient_dim = 0;
  int subspace_dim = 0;
  std::uint64_t seed = 0;
  std::vector<Frame> frames;

  std::int64_t count() const { return static_cast<std::int64_t>(frames.size()); }
};

// Frames are the first n columns of independent Haar draws; frame i only
// depends on (seed, i), so generation order and thread count never matter.
inline GrassmannSample sample_grassmann(int d, int n, std::int64_t count,
                                        std::uint64_t seed) {
  require(d >= 2 && n >= 1 && n <= d - 1, "sample_grassmann: need 1 <= n <= d-1");
  require(count >= 1, "sample_grassmann: count >= 1 required");
  GrassmannSample out;
  out.ambient_dim = d;
  out.subspace_dim = n;
  out.seed = seed;
  out.frames.resize(count);
  for (std::int64_t i = 0; i < count; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    out.frames[i] = Frame(d, n, haar_orthogonal(d, rng).leftCols(n));
  }
  return out;
}

// Coordinates of pi_V x in the frame basis: B^T x.
inline std::vector<Eigen::VectorXd> project_points(
    const Frame& v, const std::vector<Eigen::VectorXd>& points) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    require(x.size() == v.ambient_dim, "project_points: point dimension mismatch");
    out.push_back(v.basis.transpose() * x);
  }
  return out;
}

// Orthonormal basis of Span{x_i - y} by modified Gram-Schmidt. Residuals below
// 1e-8 of the input scale are reported as degenerate.
inline Frame span_plane(const Eigen::VectorXd& y,
                        const std::vector<Eigen::VectorXd>& xs) {
  const int d = static_cast<int>(y.size());
  const int m = static_cast<int>(xs.size());
  require(m >= 1 && m <= d - 1, "span_plane: need 1 <= m <= d-1 vectors");
  Eigen::MatrixXd b(d, m);
  double scale = 0.0;
  for (int j = 0; j < m; ++j) {
    require(xs[j].size() == d, "span_plane: point dimension mismatch");
    b.col(j) = xs[j] - y;
    scale = std::max(scale, b.col(j).norm());
  }
  if (scale == 0.0) throw DegeneracyError("span_plane: all vectors vanish");
  for (int j = 0; j < m; ++j) {
    for (int c = 0; c < j; ++c) b.col(j) -= b.col(c).dot(b.col(j)) * b.col(c);
    // second sweep keeps orthogonality at the 1e-10 frame tolerance
    for (int c = 0; c < j; ++c) b.col(j) -= b.col(c).dot(b.col(j)) * b.col(c);
    const double norm = b.col(j).norm();
    if (norm < 1e-8 * scale)
      throw DegeneracyError("span_plane: vectors are linearly dependent");
    b.col(j) /= norm;
  }
  return Frame(d, m, std::move(b));
}

// Principal angles between equal-(d,n) frames, ascending, in [0, pi/2].
// Cosines come from the singular values of B1^T B2; near-zero angles are
// refined through the sine route (singular values of (I - B1 B1^T) B2), since
// acos loses half the significant digits at 1.
inline std::vector<double> principal_angles(const Frame& f1, const Frame& f2) {
  require(f1.ambient_dim == f2.ambient_dim && f1.subspace_dim == f2.subspace_dim,
          "principal_angles: frames must share (d, n)");
  const int n = f1.subspace_dim;
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(f1.basis.transpose() * f2.basis);
  const Eigen::MatrixXd residual =
      f2.basis - f1.basis * (f1.basis.transpose() * f2.basis);
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(residual);
  std::vector<double> angles(n);
  for (int i = 0; i < n; ++i) {
    const double c = std::clamp(cos_svd.singularValues()[i], 0.0, 1.0);
    // cosines descend with i, sines ascend: index from the opposite end
    const double s = std::clamp(sin_svd.singularValues()[n - 1 - i], 0.0, 1.0);
    angles[i] = c > std::numbers::sqrt2 / 2.0 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

inline double max_principal_angle(const Frame& f1, const Frame& f2) {
  const auto angles = principal_angles(f1, f2);
  return angles.back();
}

// --- CSV: one frame per row, d,n,seed,index,b11,...,bdn (column-major) -------

inline void write_grassmann_csv(const GrassmannSample& g, std::ostream& os) {
  os << "d,n,seed,index";
  for (int c = 0; c < g.subspace_dim; ++c)
    for (int r = 0; r < g.ambient_dim; ++r) os << ",b" << (r + 1) << (c + 1);
  os << "\n";
  os.precision(17);
  for (std::int64_t i = 0; i < g.count(); ++i) {
    os << g.ambient_dim << "," << g.subspace_dim << "," << g.seed << "," << i;
    const auto& b = g.frames[i].basis;
    for (int c = 0; c < g.subspace_dim; ++c)
      for (int r = 0; r < g.ambient_dim; ++r) os << "," << b(r, c);
    os << "\n";
  }
}

inline void write_grassmann_csv(const GrassmannSample& g, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), "write_grassmann_csv: cannot open " + path);
  write_grassmann_csv(g, os);
}

}  // namespace frostlab
