#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "frostlab/grassmann.hpp"
#include "frostlab/measure.hpp"
#include "frostlab/projections.hpp"
#include "frostlab/rng.hpp"
#include "oracle.hpp"

using namespace frostlab;

namespace {

Frame axis_frame_2d() {
  Eigen::MatrixXd b(2, 1);
  b << 1.0, 0.0;
  return Frame(2, 1, b);
}

DiscreteMeasure circle_measure(int n, double radius = 1.0, double cx = 0.0,
                               double cy = 0.0) {
  Eigen::MatrixXd pos(n, 2);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n;
    pos(i, 0) = cx + radius * std::cos(th);
    pos(i, 1) = cy + radius * std::sin(th);
  }
  return DiscreteMeasure(2, pos, Eigen::VectorXd::Constant(n, 1.0 / n), 1.0);
}

DiscreteMeasure cantor2d(int depth, double shift_x = 0.0) {
  CantorSpec spec;
  spec.ambient_dim = 2;
  spec.ratio = 1.0 / 3.0;
  spec.depth = depth;
  auto mu = cantor_measure(spec);
  if (shift_x != 0.0) {
    Eigen::Vector2d v(shift_x, 0.0);
    mu = mu.translated(v);
  }
  return mu;
}

DiscreteMeasure single_atom(const Eigen::Vector2d& at) {
  Eigen::MatrixXd pos(1, 2);
  pos << at.x(), at.y();
  return DiscreteMeasure(2, pos, Eigen::VectorXd::Ones(1), 1.0);
}

}  // namespace

TEST_CASE("point projection is a unit bump") {
  const auto mu = single_atom({3.0, 4.0});
  const auto rho =
      pushforward_density(mu, axis_frame_2d(), 0.005, 0.01, 1.5 * mu.support_radius());
  CHECK(rho.integral() == Catch::Approx(1.0).margin(1e-9));
  std::int64_t best = 0;
  for (std::int64_t i = 0; i < rho.cell_count(); ++i)
    if (rho.values[i] > rho.values[best]) best = i;
  CHECK(rho.coord(0, best) == Catch::Approx(3.0).margin(rho.h));
}

TEST_CASE("circle projects to the arcsine law") {
  const auto mu = circle_measure(40000);
  const double h = 1.0 / 512.0, bw = 1.0 / 256.0;
  const auto rho = pushforward_density(mu, axis_frame_2d(), h, bw, 1.5);
  CHECK(lp_norm(rho, 1.0) == Catch::Approx(1.0).margin(1e-3));

  Eigen::VectorXd at(1);
  at << 0.0;
  CHECK(rho.value_at(at) == Catch::Approx(1.0 / std::numbers::pi).epsilon(0.05));

  // The L^{3/2} mass concentrates at the edge singularities, which the
  // bandwidth smooths; the oracle is the smoothed density itself. The
  // continuum value 0.9418 is only approached as bw -> 0.
  const double lp = lp_norm(rho, 1.5);
  const double smoothed = std::pow(oracle::arcsine_smoothed_lp_p(1.5, bw), 1.0 / 1.5);
  CHECK(lp == Catch::Approx(smoothed).epsilon(0.02));
  CHECK(std::pow(lp, 1.5) == Catch::Approx(oracle::kArcsineL32).epsilon(0.15));
}

TEST_CASE("norms of flat profiles") {
  // indicator of a unit interval, height 1: every L^p norm equals 1
  ProjectedDensity rho;
  rho.frame = axis_frame_2d();
  rho.origin = Eigen::VectorXd::Constant(1, 0.0);
  rho.h = 0.01;
  rho.shape = {120};
  rho.bandwidth = 0.02;
  rho.cutoff_radius = 1.0;
  rho.values.assign(120, 0.0);
  for (int i = 0; i < 100; ++i) rho.values[i] = 1.0;
  for (double p : {1.0, 1.5, 2.0, 3.0})
    CHECK(lp_norm(rho, p) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(lp_norm(rho, 0.8), PreconditionError);
}

TEST_CASE("radial slice through and away from an atom") {
  const Eigen::Vector2d a(0.4, -0.2);
  const auto mu = single_atom(a);
  const auto v = axis_frame_2d();
  const double bw = 0.05;

  // slice through the atom: y differs from a only along V-perp
  const double through =
      radial_slice(mu, Eigen::Vector2d(0.4, 3.0), v, bw, bw / 8, 10.0);
  const double peak = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * bw * 0.99730020393674);
  CHECK(through == Catch::Approx(peak).epsilon(0.01));

  // slice beyond the kernel cutoff: exactly zero
  const double away =
      radial_slice(mu, Eigen::Vector2d(0.4 + 3.2 * bw, 3.0), v, bw, bw / 8, 10.0);
  CHECK(std::abs(away) <= 1e-9);
}

TEST_CASE("slice of the circle through the center") {
  const auto mu = circle_measure(40000);
  const auto g = sample_grassmann(2, 1, 8, 21);
  for (const auto& v : g.frames) {
    const double val = radial_slice(mu, Eigen::Vector2d(0.0, 0.0), v, 1.0 / 256.0);
    CHECK(val == Catch::Approx(1.0 / std::numbers::pi).epsilon(0.05));
  }
}

TEST_CASE("rotation equivariance of the pushforward") {
  const auto mu = circle_measure(4000);
  const auto g = sample_grassmann(2, 1, 1, 5);
  const Frame& v = g.frames[0];
  const double h = 1.0 / 256.0, bw = 1.0 / 128.0;
  const auto base = pushforward_density(mu, v, h, bw, 1.5);

  CounterRng rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rot = haar_orthogonal(2, rng);
    DiscreteMeasure rmu = mu;
    rmu.positions = (rot * mu.positions.transpose()).transpose();
    const Frame rv(2, 1, rot * v.basis);
    const auto moved = pushforward_density(rmu, rv, h, bw, 1.5);
    REQUIRE(moved.cell_count() == base.cell_count());
    double worst = 0.0, peak = 0.0;
    for (std::int64_t i = 0; i < base.cell_count(); ++i) {
      worst = std::max(worst, std::abs(base.values[i] - moved.values[i]));
      peak = std::max(peak, base.values[i]);
    }
    CHECK(worst <= 0.02 * peak);
  }
}

TEST_CASE("mixed norm of the circle seen from the center") {
  const auto mu = circle_measure(4000);
  const auto nu = single_atom({0.0, 0.0});
  const auto g = sample_grassmann(2, 1, 128, 9);
  const auto rep = mixed_norm(mu, nu, 1.0, 1.0, g, 1.0 / 256.0);
  CHECK(rep.value == Catch::Approx(1.0 / std::numbers::pi).epsilon(0.05));
  CHECK(rep.grassmann_count == 128);
  CHECK(rep.nu_sample_count == 1);
}

TEST_CASE("mixed norm scales exactly in both masses") {
  const auto mu = cantor2d(3);
  const auto nu = cantor2d(3, 2.0);
  const auto g = sample_grassmann(2, 1, 32, 77);
  const double p = 1.4, q = 1.7, bw = 0.01;
  const auto base = mixed_norm(mu, nu, p, q, g, bw);
  const auto nu2 = nu.scaled_mass(2.0);
  CHECK(mixed_norm(mu, nu2, p, q, g, bw).value ==
        Catch::Approx(2.0 * base.value).epsilon(1e-12));
  const auto mu3 = mu.scaled_mass(3.0);
  CHECK(mixed_norm(mu3, nu, p, q, g, bw).value ==
        Catch::Approx(std::pow(3.0, q) * base.value).epsilon(1e-12));
}

TEST_CASE("mixed norm rejects touching supports") {
  const auto mu = cantor2d(3);
  const auto nu = cantor2d(3, 1.001);
  const auto g = sample_grassmann(2, 1, 4, 1);
  CHECK_THROWS_AS(mixed_norm(mu, nu, 1.0, 1.0, g, 0.05), PreconditionError);
}

TEST_CASE("projection identity on the standard pair") {
  const auto mu = cantor2d(4);
  const auto nu = cantor2d(4, 2.0);
  const auto g = sample_grassmann(2, 1, 128, 11);
  const auto chk = orponen_check(mu, nu, 1.3, g, 0.01);
  CHECK(chk.relative_error < 0.05);
  CHECK(chk.kernel_relative_error < 0.05);
  // matched bandwidth and grid make the reordered sums agree to roundoff
  CHECK(chk.relative_error < 1e-12);
}

TEST_CASE("projection identity at p = 1") {
  const auto mu = cantor2d(4);
  const auto nu = cantor2d(4, 2.0);
  const auto g = sample_grassmann(2, 1, 64, 13);
  const auto chk = orponen_check(mu, nu, 1.0, g, 0.01);
  CHECK(chk.relative_error < 0.02);
  CHECK(chk.kernel_relative_error < 0.02);
}

TEST_CASE("projection identity for shifted single atoms") {
  const auto mu = single_atom({0.0, 0.0});
  const auto nu = single_atom({1.0, 0.5});
  const auto g = sample_grassmann(2, 1, 16, 15);
  const auto chk = orponen_check(mu, nu, 1.7, g, 0.05);
  CHECK(chk.relative_error < 1e-6);
}

TEST_CASE("radial average of the circle at the center") {
  const auto mu = circle_measure(40000);
  const auto g = sample_grassmann(2, 1, 512, 19);
  const auto res =
      average_radial(mu, Eigen::Vector2d(0.0, 0.0), 1, g, 1.0 / 256.0);
  CHECK(res.rhs == Catch::Approx(1.0 / std::numbers::pi).epsilon(1e-10));
  CHECK(res.ratio == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("radial average closed form for a single atom in 3d") {
  Eigen::MatrixXd pos(1, 3);
  pos << 0.0, 0.0, 2.0;
  const DiscreteMeasure mu(3, pos, Eigen::VectorXd::Ones(1), 1.0);
  const auto g = sample_grassmann(3, 1, 64, 23);
  const auto res = average_radial(mu, Eigen::Vector3d(0.0, 0.0, 0.0), 1, g, 0.01);
  // (|S^0|/|S^2|) r^{n-d} = (2/(4 pi)) 2^{-2}
  CHECK(res.rhs == Catch::Approx(2.0 / (4.0 * std::numbers::pi) * 0.25).epsilon(1e-12));
}

TEST_CASE("radial average is translation invariant") {
  const auto mu = circle_measure(2000);
  const auto g = sample_grassmann(2, 1, 64, 29);
  const Eigen::Vector2d y(0.0, 0.0), shift(1.7, -0.4);
  const auto base = average_radial(mu, y, 1, g, 1.0 / 128.0);
  DiscreteMeasure moved = mu.translated(shift);
  const auto res = average_radial(moved, y + shift, 1, g, 1.0 / 128.0, 0.0,
                                  1.5 * moved.support_radius() + 5.0);
  CHECK(res.rhs == Catch::Approx(base.rhs).epsilon(1e-10));
  CHECK(res.lhs == Catch::Approx(base.lhs).epsilon(1e-6));
}

TEST_CASE("radial average rejects points near the support") {
  const auto mu = circle_measure(100);
  const auto g = sample_grassmann(2, 1, 4, 31);
  CHECK_THROWS_AS(
      average_radial(mu, Eigen::Vector2d(0.99, 0.0), 1, g, 0.05),
      PreconditionError);
}

TEST_CASE("coverage of directions hitting a square") {
  // grid atoms on [0,1]^2 seen from (-1, 0): the direction cone has the exact
  // aperture of the corner angles
  const int side = 32;
  Eigen::MatrixXd pos(side * side, 2);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      pos(i * side + j, 0) = (i + 0.5) / side;
      pos(i * side + j, 1) = (j + 0.5) / side;
    }
  const DiscreteMeasure e_atoms(
      2, pos, Eigen::VectorXd::Constant(side * side, 1.0 / (side * side)), 1.0);
  const Eigen::Vector2d y(-1.0, 0.0);
  const double res_angle = 0.02;
  const double cov = plane_coverage(e_atoms, y, 1, 4096, 42, res_angle, 2048);

  const double aperture = oracle::subtended_line_angle(
      {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}}, y);
  const double expected = aperture / std::numbers::pi;
  CHECK(cov == Catch::Approx(expected).margin(0.04));
}

TEST_CASE("coverage of a collinear cloud is the resolution ball") {
  Eigen::MatrixXd pos(50, 2);
  for (int i = 0; i < 50; ++i) {
    pos(i, 0) = 0.1 + 0.01 * i;
    pos(i, 1) = 0.0;
  }
  const DiscreteMeasure e_atoms(2, pos, Eigen::VectorXd::Constant(50, 0.02), 1.0);
  const double res_angle = 0.05;
  const double cov =
      plane_coverage(e_atoms, Eigen::Vector2d(-1.0, 0.0), 1, 256, 7, res_angle, 2048);
  CHECK(cov <= 3.0 * res_angle);
}

TEST_CASE("coverage grows with more tuples") {
  CounterRng rng(66);
  Eigen::MatrixXd pos(60, 3);
  for (int i = 0; i < 60; ++i)
    for (int a = 0; a < 3; ++a) pos(i, a) = rng.next_unit();
  const DiscreteMeasure e_atoms(3, pos, Eigen::VectorXd::Constant(60, 1.0 / 60), 1.0);
  const Eigen::Vector3d y(-2.0, 0.3, 0.1);
  const double small =
      plane_coverage(e_atoms, y, 2, 100, 5, 0.15, 512);
  const double large =
      plane_coverage(e_atoms, y, 2, 1000, 5, 0.15, 512);
  CHECK(large >= small);
}

TEST_CASE("the cutoff keeps the projected mass") {
  // psi = 1 on the support: pushforward mass equals the measure mass
  const auto mu = cantor2d(4);
  const auto g = sample_grassmann(2, 1, 8, 37);
  for (const auto& v : g.frames) {
    const auto rho =
        pushforward_density(mu, v, 0.005, 0.01, 1.5 * mu.support_radius());
    CHECK(rho.integral() == Catch::Approx(1.0).margin(1e-3));
  }
  CHECK_THROWS_AS(
      pushforward_density(cantor2d(2), axis_frame_2d(), 0.02, 0.01, 10.0),
      PreconditionError);
}
