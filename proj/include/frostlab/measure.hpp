// Discrete measures: weighted atom clouds with compact support, the Cantor
// product construction, and the Frostman constant estimator.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "frostlab/core.hpp"

namespace frostlab {

struct DiscreteMeasure {
  int dim = 0;
  Eigen::MatrixXd positions;  // one atom per row, dim columns
  Eigen::VectorXd weights;    // nonnegative
  double declared_mass = 0.0;

  DiscreteMeasure() = default;
  DiscreteMeasure(int d, Eigen::MatrixXd pos, Eigen::VectorXd w, double mass)
      : dim(d), positions(std::move(pos)), weights(std::move(w)), declared_mass(mass) {
    validate();
  }

  std::int64_t atom_count() const { return positions.rows(); }

  double mass() const { return weights.sum(); }

  void validate() const {
    require(dim >= 1, "DiscreteMeasure: ambient dimension must be >= 1");
    require(positions.cols() == dim, "DiscreteMeasure: position width != dim");
    require(positions.rows() == weights.size(),
            "DiscreteMeasure: atom/weight count mismatch");
    require(declared_mass > 0.0, "DiscreteMeasure: declared mass must be > 0");
    require((weights.array() >= 0.0).all(), "DiscreteMeasure: negative weight");
    require(positions.allFinite(), "DiscreteMeasure: non-finite position");
    const double total = weights.sum();
    require(std::abs(total - declared_mass) <= 1e-12 * declared_mass,
            "DiscreteMeasure: weights sum to " + std::to_string(total) +
                ", declared " + std::to_string(declared_mass));
  }

  Eigen::VectorXd box_min() const { return positions.colwise().minCoeff(); }
  Eigen::VectorXd box_max() const { return positions.colwise().maxCoeff(); }

  // Largest distance from the origin to an atom; the radial cutoff scale.
  double support_radius() const { return positions.rowwise().norm().maxCoeff(); }

  DiscreteMeasure translated(const Eigen::VectorXd& v) const {
    DiscreteMeasure out = *this;
    out.positions.rowwise() += v.transpose();
    return out;
  }

  DiscreteMeasure scaled_positions(double lambda) const {
    DiscreteMeasure out = *this;
    out.positions *= lambda;
    return out;
  }

  DiscreteMeasure scaled_mass(double c) const {
    require(c > 0.0, "scaled_mass: factor must be positive");
    DiscreteMeasure out = *this;
    out.weights *= c;
    out.declared_mass *= c;
    return out;
  }

  // Mass of the closed ball B(center, r).
  double ball_mass(const Eigen::VectorXd& center, double r) const {
    double acc = 0.0;
    for (std::int64_t i = 0; i < atom_count(); ++i)
      if ((positions.row(i).transpose() - center).norm() <= r) acc += weights[i];
    return acc;
  }
};

struct CantorSpec {
  int ambient_dim = 1;
  int branches = 2;          // per-axis branch count b >= 2
  double ratio = 1.0 / 3.0;  // per-axis contraction rho in (0, 1/b]
  int depth = 0;
  std::vector<int> active_axes;  // empty means all axes active

  std::vector<int> resolved_axes() const {
    if (!active_axes.empty()) return active_axes;
    std::vector<int> all(ambient_dim);
    for (int i = 0; i < ambient_dim; ++i) all[i] = i;
    return all;
  }

  double axis_dimension() const { return std::log(branches) / std::log(1.0 / ratio); }
  double total_dimension() const {
    return static_cast<double>(resolved_axes().size()) * axis_dimension();
  }

  void validate() const {
    require(ambient_dim >= 1, "CantorSpec: ambient_dim >= 1 required");
    require(branches >= 2, "CantorSpec: branch count must be >= 2");
    require(ratio > 0.0 && ratio <= 1.0 / branches,
            "CantorSpec: ratio must lie in (0, 1/branches]");
    require(depth >= 0, "CantorSpec: depth must be >= 0");
    const auto axes = resolved_axes();
    require(!axes.empty(), "CantorSpec: at least one active axis");
    for (int a : axes)
      require(a >= 0 && a < ambient_dim, "CantorSpec: axis index out of range");
    const double dimension = total_dimension();
    require(dimension > 0.0 && dimension <= ambient_dim,
            "CantorSpec: target dimension " + std::to_string(dimension) +
                " outside (0, d]");
  }
};

inline constexpr std::int64_t kAtomCap = std::int64_t{1} << 24;

// Equal-weight atoms at the centers of the depth-k Cantor cells of the product
// construction on [0,1]^d. Inactive axes sit at 0.5.
inline DiscreteMeasure cantor_measure(const CantorSpec& spec) {
  spec.validate();
  const auto axes = spec.resolved_axes();
  const int b = spec.branches;
  const double rho = spec.ratio;

  // depth-k cell start coordinates along one axis
  std::vector<double> starts{0.0};
  for (int level = 0; level < spec.depth; ++level) {
    const double scale = std::pow(rho, level);
    std::vector<double> next;
    next.reserve(starts.size() * b);
    for (double s0 : starts)
      for (int j = 0; j < b; ++j)
        next.push_back(s0 + j * (1.0 - rho) / (b - 1) * scale);
    starts = std::move(next);
    require(std::pow(static_cast<double>(starts.size()),
                     static_cast<double>(axes.size())) <=
                static_cast<double>(kAtomCap),
            "cantor_measure: atom count would exceed the 2^24 cap");
  }
  const double half_cell = 0.5 * std::pow(rho, spec.depth);
  std::vector<double> centers(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) centers[i] = starts[i] + half_cell;

  const std::int64_t per_axis = static_cast<std::int64_t>(centers.size());
  std::int64_t count = 1;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    require(count <= kAtomCap / per_axis,
            "cantor_measure: atom count would exceed the 2^24 cap");
    count *= per_axis;
  }

  Eigen::MatrixXd pos(count, spec.ambient_dim);
  pos.setConstant(0.5);
  for (std::int64_t i = 0; i < count; ++i) {
    std::int64_t rest = i;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      pos(i, axes[a]) = centers[rest % per_axis];
      rest /= per_axis;
    }
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));
  return DiscreteMeasure(spec.ambient_dim, std::move(pos), std::move(w), 1.0);
}

// max over the given centers and radii of mu(B(x,r)) / r^s; a lower bound on
// the true Frostman constant.
inline double frostman_constant(const DiscreteMeasure& mu, double s,
                                const std::vector<double>& radii,
                                const std::vector<Eigen::VectorXd>& centers) {
  require(s > 0.0 && s <= mu.dim, "frostman_constant: s must lie in (0, d]");
  require(!radii.empty(), "frostman_constant: empty radii list");
  require(!centers.empty(), "frostman_constant: empty centers list");
  double best = 0.0;
  for (const auto& c : centers) {
    require(c.size() == mu.dim, "frostman_constant: center dimension mismatch");
    for (double r : radii) {
      require(r > 0.0, "frostman_constant: radii must be positive");
      best = std::max(best, mu.ball_mass(c, r) / std::pow(r, s));
    }
  }
  return best;
}

// --- CSV serialization: header x1,...,xd,w; one atom per row -----------------

inline void write_measure_csv(const DiscreteMeasure& mu, std::ostream& os) {
  for (int j = 0; j < mu.dim; ++j) os << "x" << (j + 1) << ",";
  os << "w\n";
  os.precision(17);
  for (std::int64_t i = 0; i < mu.atom_count(); ++i) {
    for (int j = 0; j < mu.dim; ++j) os << mu.positions(i, j) << ",";
    os << mu.weights[i] << "\n";
  }
}

inline void write_measure_csv(const DiscreteMeasure& mu, const std::string& path) {
  std::ofstream os(path);
  require(os.good(), "write_measure_csv: cannot open " + path);
  write_measure_csv(mu, os);
}

inline DiscreteMeasure read_measure_csv(std::istream& is) {
  std::string header;
  require(static_cast<bool>(std::getline(is, header)), "read_measure_csv: empty input");
  int dim = 0;
  {
    std::stringstream ss(header);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    require(cols.size() >= 2 && cols.back() == "w",
            "read_measure_csv: header must be x1,...,xd,w");
    dim = static_cast<int>(cols.size()) - 1;
  }
  std::vector<double> flat;
  std::vector<double> ws;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    require(static_cast<int>(row.size()) == dim + 1,
            "read_measure_csv: bad column count in row");
    for (int j = 0; j < dim; ++j) flat.push_back(row[j]);
    ws.push_back(row.back());
  }
  const std::int64_t n = static_cast<std::int64_t>(ws.size());
  require(n > 0, "read_measure_csv: no atoms");
  Eigen::MatrixXd pos(n, dim);
  for (std::int64_t i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) pos(i, j) = flat[i * dim + j];
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(ws.data(), n);
  const double total = w.sum();
  return DiscreteMeasure(dim, std::move(pos), std::move(w), total);
}

inline DiscreteMeasure read_measure_csv_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "read_measure_csv: cannot open " + path);
  return read_measure_csv(is);
}

}  // namespace frostlab
