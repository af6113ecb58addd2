// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "frostlab/frostlab.hpp"
#include "oracle.hpp"

using namespace frostlab;

namespace {

struct CriterionResult {
  bool pass = true;
  std::string detail;
};

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

DiscreteMeasure cantor2d(int depth, double shift_x = 0.0, double ratio = 1.0 / 3.0) {
  CantorSpec spec;
  spec.ambient_dim = 2;
  spec.ratio = ratio;
  spec.depth = depth;
  auto mu = cantor_measure(spec);
  if (shift_x != 0.0) {
    Eigen::Vector2d v(shift_x, 0.0);
    mu = mu.translated(v);
  }
  return mu;
}

DiscreteMeasure circle_measure(int n, double radius, double cx, double cy) {
  Eigen::MatrixXd pos(n, 2);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n;
    pos(i, 0) = cx + radius * std::cos(th);
    pos(i, 1) = cy + radius * std::sin(th);
  }
  return DiscreteMeasure(2, pos, Eigen::VectorXd::Constant(n, 1.0 / n), 1.0);
}

// ---- criterion 1: projection identity on the standard pair ---------------------

CriterionResult criterion_orponen() {
  const double t0 = now_s();
  const auto mu = cantor2d(6);
  const auto nu = cantor2d(6, 2.0);
  const auto g = sample_grassmann(2, 1, 512, 20240601);
  const auto chk = orponen_check(mu, nu, 1.3, g, 0.01);
  const double elapsed = now_s() - t0;
  CriterionResult res;
  res.pass = chk.relative_error < 0.05 && elapsed < 60.0;
  res.detail = fmt("relative_error=%.3e (cap 0.05), kernel path %.3e, %.1fs (cap 60s)",
                   chk.relative_error, chk.kernel_relative_error, elapsed);
  return res;
}

// ---- criterion 2: energy duality and interval closed forms ---------------------

CriterionResult criterion_energy() {
  CriterionResult res;
  const auto mu = cantor2d(5);
  MollifierSpec moll;
  moll.bandwidth = 0.002;
  const auto field = mollify(mu, moll, default_grid_for(mu, 0.002, 0.001));
  std::string parts;
  for (double s : {0.3, 0.7, 1.2}) {
    const double direct = riesz_energy_direct(mu, s, moll.bandwidth).value.real();
    const double fourier = riesz_energy_fourier(field, s).value.real();
    const double gap = std::abs(direct - fourier) / direct;
    if (gap >= 0.05) res.pass = false;
    parts += fmt("s=%.1f gap=%.4f ", s, gap);
  }

  // I_{1/2}(Leb[0,1]) = 8/3 over a seeded uniform cloud
  CounterRng rng(7);
  const int n = 8001;
  Eigen::MatrixXd pos(n, 1);
  for (int i = 0; i < n; ++i) pos(i, 0) = rng.next_unit();
  const DiscreteMeasure leb(1, pos, Eigen::VectorXd::Constant(n, 1.0 / n), 1.0);
  const double e = riesz_energy_direct(leb, 0.5).value.real();
  const double e_gap = std::abs(e - oracle::kLebEnergyHalf) / oracle::kLebEnergyHalf;
  if (e_gap >= 0.02) res.pass = false;

  // A_{1/2}(Leb[0,1]) = 2 sqrt 2 at the midpoint probe
  Eigen::MatrixXd mid(n, 1);
  for (int i = 0; i < n; ++i) mid(i, 0) = (i + 0.5) / n;
  const DiscreteMeasure lebm(1, mid, Eigen::VectorXd::Constant(n, 1.0 / n), 1.0);
  Eigen::VectorXd probe(1);
  probe << 0.5;
  const double a = riesz_amplitude(lebm, 0.5, {probe}, 1.0 / n);
  const double a_gap =
      std::abs(a - oracle::kLebAmplitudeHalf) / oracle::kLebAmplitudeHalf;
  if (a_gap >= 0.02) res.pass = false;

  res.detail = parts + fmt("(caps 0.05); I=%.4f gap=%.4f, A=%.4f gap=%.4f (caps 0.02)",
                           e, e_gap, a, a_gap);
  return res;
}

// ---- criterion 3: the L2 projection / energy ratio is measure-independent ------

CriterionResult criterion_kaufman() {
  const double delta = 0.004;
  std::vector<DiscreteMeasure> measures;
  measures.push_back(cantor2d(5));
  measures.push_back(cantor2d(5, 0.0, 0.25));
  measures.push_back(circle_measure(2000, 0.35, 0.5, 0.5));

  const auto g = equispaced_lines(512);
  std::vector<double> ratios;
  for (const auto& mu : measures) {
    const double psi = 1.5 * mu.support_radius();
    std::vector<double> norms(g.count());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < g.count(); ++j) {
      const auto rho =
          pushforward_density(mu, g.frames[j], 0.5 * delta, delta, psi);
      const double l2 = lp_norm(rho, 2.0);
      norms[j] = l2 * l2;
    }
    const double numerator = pairwise_sum(norms) / static_cast<double>(g.count());
    MollifierSpec moll;
    moll.bandwidth = delta;
    const auto field = mollify(mu, moll, default_grid_for(mu, delta, delta / 2));
    const double denominator = riesz_energy_fourier(field, 1.0).value.real();
    ratios.push_back(numerator / denominator);
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  const double mean = (ratios[0] + ratios[1] + ratios[2]) / 3.0;
  const double spread = (hi - lo) / mean;
  CriterionResult res;
  res.pass = spread < 0.03;
  res.detail = fmt("ratios %.5f / %.5f / %.5f, spread=%.4f (cap 0.03), 1/pi=%.5f",
                   ratios[0], ratios[1], ratios[2], spread, 1.0 / std::numbers::pi);
  return res;
}

// ---- criterion 4: rotation-averaged slice equals the radial integral -----------

CriterionResult criterion_radial() {
  const auto mu = circle_measure(40000, 1.0, 0.0, 0.0);
  const auto g = sample_grassmann(2, 1, 512, 777);
  const auto out = average_radial(mu, Eigen::Vector2d(0.0, 0.0), 1, g, 0.01);
  CriterionResult res;
  res.pass = std::abs(out.ratio - 1.0) < 0.05;
  res.detail = fmt("lhs=%.5f rhs=%.5f ratio=%.4f (cap |ratio-1| < 0.05)", out.lhs,
                   out.rhs, out.ratio);
  return res;
}

// ---- criterion 5: the complex potential family identities ----------------------

CriterionResult criterion_mu_z() {
  CriterionResult res;
  const auto mu = cantor2d(4);
  MollifierSpec moll;
  moll.bandwidth = 0.02;
  const auto gs = default_grid_for(mu, moll.bandwidth, 0.01);
  const auto field = mollify(mu, moll, gs);

  // z = 0 multiplier collapse
  const auto pot0 = riesz_potential_complex(field, RieszOrder{cplx{0.0, 0.0}});
  const auto win = crop_field(pot0, field.shape);
  double z0_dev = 0.0;
  for (std::int64_t i = 0; i < field.cell_count(); ++i)
    z0_dev = std::max(z0_dev,
                      std::abs(win.samples[i] - std::numbers::pi * field.samples[i]));
  z0_dev /= std::numbers::pi * field.max_abs();
  if (!(z0_dev <= 1e-8)) res.pass = false;

  // the exact energy ratio at (d, s, z) = (2, 1.2, 0.2)
  const double s = 1.2;
  const cplx z{0.2, 0.0};
  const double lhs = potential_energy_spectral(mu, moll, gs, z, s);
  const double rhs = riesz_energy_fourier(field, s - 0.4).value.real();
  const double expected = energy_ratio_constant(2, s, z);
  const double ratio_err = std::abs(lhs / rhs - expected) / expected;
  if (!(ratio_err < 0.03)) res.pass = false;

  // reflection identity on 100 seeded points
  CounterRng rng(515253);
  double reflect_dev = 0.0;
  int accepted = 0;
  while (accepted < 100) {
    const cplx zz{rng.next_uniform(-10.0, 10.0), rng.next_uniform(-10.0, 10.0)};
    if (std::abs(zz.imag()) < 0.2 && std::abs(zz.real() - std::round(zz.real())) < 0.2)
      continue;
    ++accepted;
    const cplx val = complex_gamma(zz) * complex_gamma(1.0 - zz) *
                     std::sin(std::numbers::pi * zz) / std::numbers::pi;
    reflect_dev = std::max(reflect_dev, std::abs(val - 1.0));
  }
  if (!(reflect_dev <= 1e-8)) res.pass = false;

  res.detail = fmt("z0 dev=%.2e (cap 1e-8), energy ratio err=%.4f (cap 0.03), "
                   "reflection dev=%.2e (cap 1e-8)",
                   z0_dev, ratio_err, reflect_dev);
  return res;
}

// ---- criterion 6: closed-form exponents against brute force --------------------

CriterionResult criterion_exponents() {
  const double t0 = now_s();
  CriterionResult res;
  CounterRng rng(909090);

  // optimizer: closed form vs 200^3 grid on 1000 random pairs
  int optimizer_fails = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_below(3));
    const int n = 1 + static_cast<int>(rng.next_below(d - 1));
    double s_nu = 0.0, s_mu = 0.0;
    while (true) {
      s_nu = rng.next_uniform(1e-3, n - 1e-3);
      if (2.0 * n - s_nu >= d) continue;
      s_mu = rng.next_uniform(2.0 * n - s_nu + 1e-9, d - 1e-9);
      break;
    }
    const auto out = optimize_parameters(d, n, FrostmanPair{s_mu, s_nu}, 200);
    if (!out.agree) ++optimizer_fails;
  }
  if (optimizer_fails != 0) res.pass = false;

  // region membership vs the t-grid feasibility oracle, zero disagreements;
  // points where the two oracle resolutions disagree are boundary-ambiguous
  // at scan resolution and excluded
  int disagreements = 0, compared = 0, ambiguous = 0;
  while (compared < 10000) {
    const int d = 2 + static_cast<int>(rng.next_below(3));
    const int n = 1 + static_cast<int>(rng.next_below(d - 1));
    double s_nu = 0.0, s_mu = 0.0;
    while (true) {
      s_nu = rng.next_uniform(1e-3, n - 1e-3);
      if (2.0 * n - s_nu >= d) continue;
      s_mu = rng.next_uniform(2.0 * n - s_nu + 1e-9, d - 1e-9);
      break;
    }
    const double p = rng.next_uniform(1.0, 6.0);
    const double q = rng.next_uniform(1.0, 8.0);
    const bool coarse = oracle::t_scan_feasible(d, n, s_mu, s_nu, p, q, 10000);
    const bool fine = oracle::t_scan_feasible(d, n, s_mu, s_nu, p, q, 40000);
    if (coarse != fine) {
      ++ambiguous;
      continue;
    }
    ++compared;
    const auto region = admissible_pq_region(d, n, FrostmanPair{s_mu, s_nu});
    if (region.admits(p, q) != coarse) ++disagreements;
  }
  if (disagreements != 0) res.pass = false;

  // visibility specialization at m = 1
  bool visibility_ok = true;
  for (int d = 2; d <= 6; ++d) {
    const auto rep = visibility_thresholds(d, 1);
    if (std::abs(rep.threshold_i - (d - 1.0)) > 1e-12) visibility_ok = false;
    for (int k = 0; k < 50; ++k) {
      const double dim_e = rng.next_uniform(d - 1.0, static_cast<double>(d));
      const double want = std::max(2.0 * (d - 1) - dim_e, 0.0);
      if (std::abs(rep.exceptional_bound(dim_e).value - want) > 1e-12)
        visibility_ok = false;
    }
  }
  if (!visibility_ok) res.pass = false;

  const double elapsed = now_s() - t0;
  if (elapsed >= 120.0) res.pass = false;
  res.detail = fmt("optimizer fails=%d/1000, region disagreements=%d/10000 "
                   "(ambiguous skipped %d), m=1 visibility %s, %.1fs (cap 120s)",
                   optimizer_fails, disagreements, ambiguous,
                   visibility_ok ? "exact" : "BROKEN", elapsed);
  return res;
}

// ---- criterion 7: jump-figure tabulation ----------------------------------------

CriterionResult criterion_jump() {
  CriterionResult res;
  const int d = 3, n = 2;  // n > d/2
  const auto fig = jump_figure_data(d, n, 64);
  bool has_nn = false, has_corner = false;
  for (const auto& v : fig.polygon) {
    if (std::abs(v[0] - n) < 1e-15 && std::abs(v[1] - n) < 1e-15) has_nn = true;
    if (std::abs(v[0] - d) < 1e-15 && std::abs(v[1] - (2.0 * n - d)) < 1e-15)
      has_corner = true;
  }
  if (!has_nn || !has_corner) res.pass = false;

  double worst = 0.0;
  for (const auto& sp : fig.segment) {
    const double limit = 2.0 * n / (3.0 * n - sp.s_mu);
    const double direct =
        admissible_p_bound(d, n, FrostmanPair{sp.s_mu, 2.0 * n - sp.s_mu + 1e-12});
    worst = std::max(worst, std::abs(sp.p_limit - limit));
    worst = std::max(worst, std::abs(sp.p_limit - direct));
  }
  if (!(worst <= 1e-9)) res.pass = false;
  res.detail = fmt("vertices (n,n)%s (d,2n-d)%s, segment-limit dev=%.2e (cap 1e-9)",
                   has_nn ? "+" : "-", has_corner ? "+" : "-", worst);
  return res;
}

// ---- criterion 8: byte-identical payloads at 1 and 8 threads --------------------

CriterionResult criterion_determinism() {
  namespace fs = std::filesystem;
  CriterionResult res;
  const auto base_dir = fs::temp_directory_path() / "frostlab_acceptance";
  fs::create_directories(base_dir);

  const std::vector<std::string> kinds = {"orponen-check", "mixed-norm", "energy",
                                          "mu-z-identity"};
  int mismatches = 0;
  for (const auto& kind : kinds) {
    std::string fingerprints[2];
    std::string csv[2];
    for (int round = 0; round < 2; ++round) {
      ExperimentConfig cfg;
      cfg.set_text("kind", kind);
      cfg.set_int("depth", 3);
      cfg.set_int("frames", 64);
      cfg.set_int("seed", 1234);
      cfg.set_real("delta", 0.02);
      cfg.set_real("s", kind == "mu-z-identity" ? 1.2 : 0.7);
      cfg.set_real("epsilon", 0.02);
      cfg.set_int("threads", round == 0 ? 1 : 8);
      const auto dir = base_dir / (kind + "-t" + std::to_string(round));
      fs::remove_all(dir);
      cfg.set_text("out_dir", dir.string());
      const auto rec = run(cfg);
      fingerprints[round] = payload_fingerprint(rec.payload);
      for (const auto& f : rec.files)
        if (f.size() > 4 && f.substr(f.size() - 4) == ".csv") {
          std::ifstream is(f, std::ios::binary);
          csv[round].assign(std::istreambuf_iterator<char>(is), {});
        }
    }
    if (fingerprints[0] != fingerprints[1] || csv[0] != csv[1]) ++mismatches;
  }
  res.pass = mismatches == 0;
  res.detail = fmt("%d/%zu experiment kinds byte-identical at 1 vs 8 threads",
                   static_cast<int>(kinds.size()) - mismatches, kinds.size());
  return res;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<CriterionResult()> fn;
  };
  const std::vector<Entry> criteria = {
      {"1 projection identity (standard pair)", criterion_orponen},
      {"2 energy duality and interval closed forms", criterion_energy},
      {"3 projection/energy ratio constancy", criterion_kaufman},
      {"4 rotation-averaged radial slice", criterion_radial},
      {"5 complex potential identities", criterion_mu_z},
      {"6 exponent formulas vs brute force", criterion_exponents},
      {"7 jump-figure tabulation", criterion_jump},
      {"8 determinism across threads", criterion_determinism},
  };

  int failures = 0;
  for (const auto& entry : criteria) {
    CriterionResult res;
    try {
      res = entry.fn();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    if (!res.pass) ++failures;
    std::printf("[%s] criterion %s: %s\n", res.pass ? "PASS" : "FAIL", entry.name,
                res.detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0)
    std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
