// Experiment runner: flat typed configuration with a published knob registry,
// seeded reproducible runs, scans over one knob, and CSV/JSON emission.
#pragma once

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "frostlab/core.hpp"
#include "frostlab/exponents.hpp"
#include "frostlab/gamma.hpp"
#include "frostlab/grassmann.hpp"
#include "frostlab/grid.hpp"
#include "frostlab/measure.hpp"
#include "frostlab/potentials.hpp"
#include "frostlab/projections.hpp"
#include "frostlab/rng.hpp"

#ifndef FROSTLAB_VERSION
#define FROSTLAB_VERSION "unversioned"
#endif

namespace frostlab {

using json = nlohmann::ordered_json;

// --- configuration -------------------------------------------------------------

struct ConfigValue {
  enum class Type { integer, real, text };
  Type type = Type::integer;
  std::int64_t i = 0;
  double r = 0.0;
  std::string s;

  static ConfigValue of_int(std::int64_t v) { return {Type::integer, v, 0.0, {}}; }
  static ConfigValue of_real(double v) { return {Type::real, 0, v, {}}; }
  static ConfigValue of_text(std::string v) {
    return {Type::text, 0, 0.0, std::move(v)};
  }

  std::string canonical() const {
    switch (type) {
      case Type::integer: return std::to_string(i);
      case Type::real: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", r);
        return buf;
      }
      default: return s;
    }
  }
};

struct KnobSpec {
  const char* name;
  ConfigValue def;
  const char* doc;
};

// Every knob any experiment reads, with its default. Unknown keys are hard
// errors; silent typos corrupt experiments.
inline const std::vector<KnobSpec>& knob_registry() {
  static const std::vector<KnobSpec> reg = {
      {"kind", ConfigValue::of_text(""), "experiment kind"},
      {"out_dir", ConfigValue::of_text("out"), "output directory"},
      {"seed", ConfigValue::of_int(1), "base RNG seed"},
      {"threads", ConfigValue::of_int(0), "worker threads (0 = library default)"},
      {"d", ConfigValue::of_int(2), "ambient dimension"},
      {"n", ConfigValue::of_int(1), "subspace dimension"},
      {"m", ConfigValue::of_int(1), "spanned-plane dimension"},
      {"depth", ConfigValue::of_int(4), "Cantor construction depth"},
      {"branches", ConfigValue::of_int(2), "Cantor per-axis branch count"},
      {"ratio", ConfigValue::of_real(1.0 / 3.0), "Cantor per-axis contraction"},
      {"axes", ConfigValue::of_text(""), "active Cantor axes, e.g. \"0\" (empty = all)"},
      {"atoms", ConfigValue::of_int(2001), "atom count for circle/uniform/grid"},
      {"mu_kind", ConfigValue::of_text("cantor"),
       "mu builder: cantor|circle|uniform|grid|csv"},
      {"mu_path", ConfigValue::of_text(""), "CSV path when mu_kind=csv"},
      {"mu_offset", ConfigValue::of_real(0.0), "translate mu along the first axis"},
      {"nu_kind", ConfigValue::of_text("cantor"),
       "nu builder: cantor|circle|uniform|grid|csv"},
      {"nu_path", ConfigValue::of_text(""), "CSV path when nu_kind=csv"},
      {"nu_offset", ConfigValue::of_real(2.0), "translate nu along the first axis"},
      {"circle_radius", ConfigValue::of_real(1.0), "circle builder radius"},
      {"circle_cx", ConfigValue::of_real(0.0), "circle builder center x"},
      {"circle_cy", ConfigValue::of_real(0.0), "circle builder center y"},
      {"delta", ConfigValue::of_real(0.01), "mollifier bandwidth"},
      {"profile", ConfigValue::of_text("gaussian"), "mollifier profile: gaussian|bump"},
      {"grid_h", ConfigValue::of_real(0.0), "grid spacing (0 = delta/2)"},
      {"bandwidth", ConfigValue::of_real(0.01), "projection smoothing bandwidth"},
      {"psi_factor", ConfigValue::of_real(1.5), "cutoff radius / support radius"},
      {"frames", ConfigValue::of_int(512), "Grassmann sample count"},
      {"epsilon", ConfigValue::of_real(0.0), "kernel clamp for direct sums"},
      {"padding", ConfigValue::of_int(2), "FFT zero-padding factor"},
      {"boundary_tol", ConfigValue::of_real(1e-8), "spectral boundary decay check"},
      {"s", ConfigValue::of_real(1.5), "energy order / exponent parameter s"},
      {"t", ConfigValue::of_real(0.8), "nu-side dimension parameter"},
      {"alpha", ConfigValue::of_real(1.5), "amplitude order parameter"},
      {"p", ConfigValue::of_real(1.3), "inner exponent"},
      {"q", ConfigValue::of_real(1.3), "outer exponent"},
      {"s_mu", ConfigValue::of_real(1.5), "Frostman exponent of mu"},
      {"s_nu", ConfigValue::of_real(0.8), "Frostman exponent of nu"},
      {"z_re", ConfigValue::of_real(0.2), "Re z of the potential order"},
      {"z_im", ConfigValue::of_real(0.0), "Im z of the potential order"},
      {"w_re", ConfigValue::of_real(0.3), "Re w of the second potential order"},
      {"w_im", ConfigValue::of_real(0.0), "Im w of the second potential order"},
      {"dim_e", ConfigValue::of_real(1.5), "dim E for visibility bounds"},
      {"y1", ConfigValue::of_real(-1.0), "evaluation point, axis 1"},
      {"y2", ConfigValue::of_real(-1.0), "evaluation point, axis 2"},
      {"y3", ConfigValue::of_real(-1.0), "evaluation point, axis 3"},
      {"trials", ConfigValue::of_int(512), "plane-coverage tuple draws"},
      {"resolution", ConfigValue::of_int(64), "grid resolution for scans/figures"},
      {"resolution_angle", ConfigValue::of_real(0.05),
       "principal-angle radius for coverage"},
      {"ref_count", ConfigValue::of_int(512), "coverage reference sample size"},
      {"probes_extra", ConfigValue::of_int(0), "extra random amplitude probes"},
      {"emit_measure", ConfigValue::of_int(0), "also write the measure CSV"},
      {"emit_frames", ConfigValue::of_int(0), "also write the frame CSV"},
      {"emit_field", ConfigValue::of_int(0), "also write the mollified field"},
      {"scan_knob", ConfigValue::of_text(""), "knob name swept by scan"},
      {"scan_from", ConfigValue::of_real(0.0), "scan range start"},
      {"scan_to", ConfigValue::of_real(0.0), "scan range end"},
      {"scan_steps", ConfigValue::of_int(0), "scan point count"},
      {"base_kind", ConfigValue::of_text(""), "experiment kind scanned over"},
  };
  return reg;
}

class ExperimentConfig {
 public:
  ExperimentConfig() {
    for (const auto& k : knob_registry()) values_[k.name] = k.def;
  }

  static const KnobSpec& spec_for(const std::string& name) {
    for (const auto& k : knob_registry())
      if (name == k.name) return k;
    throw ConfigError("unknown config key '" + name + "'");
  }

  void set_int(const std::string& name, std::int64_t v) {
    expect_type(name, ConfigValue::Type::integer);
    values_[name].i = v;
  }
  void set_real(const std::string& name, double v) {
    expect_type(name, ConfigValue::Type::real);
    values_[name].r = v;
  }
  void set_text(const std::string& name, std::string v) {
    expect_type(name, ConfigValue::Type::text);
    values_[name].s = std::move(v);
  }

  // Accepts integer literals for real knobs; everything else must match.
  void set_from_json(const std::string& name, const json& v) {
    const auto& spec = spec_for(name);
    switch (spec.def.type) {
      case ConfigValue::Type::integer:
        if (!v.is_number_integer())
          throw ConfigError("config key '" + name + "' must be an integer");
        set_int(name, v.get<std::int64_t>());
        break;
      case ConfigValue::Type::real:
        if (!v.is_number())
          throw ConfigError("config key '" + name + "' must be a number");
        set_real(name, v.get<double>());
        break;
      case ConfigValue::Type::text:
        if (!v.is_string())
          throw ConfigError("config key '" + name + "' must be a string");
        set_text(name, v.get<std::string>());
        break;
    }
  }

  std::int64_t get_int(const std::string& name) const {
    expect_type(name, ConfigValue::Type::integer);
    return values_.at(name).i;
  }
  double get_real(const std::string& name) const {
    expect_type(name, ConfigValue::Type::real);
    return values_.at(name).r;
  }
  const std::string& get_text(const std::string& name) const {
    expect_type(name, ConfigValue::Type::text);
    return values_.at(name).s;
  }

  static ExperimentConfig from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config document must be a JSON object");
    ExperimentConfig cfg;
    for (const auto& [key, value] : j.items()) cfg.set_from_json(key, value);
    return cfg;
  }

  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is.good()) throw ConfigError("cannot open config file " + path);
    json j;
    try {
      is >> j;
    } catch (const std::exception& e) {
      throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return from_json(j);
  }

  json to_json() const {
    json out;
    for (const auto& k : knob_registry()) {
      const auto& v = values_.at(k.name);
      switch (v.type) {
        case ConfigValue::Type::integer: out[k.name] = v.i; break;
        case ConfigValue::Type::real: out[k.name] = v.r; break;
        case ConfigValue::Type::text: out[k.name] = v.s; break;
      }
    }
    return out;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto feed = [&](const std::string& s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    };
    for (const auto& k : knob_registry()) {
      feed(k.name);
      feed("=");
      feed(values_.at(k.name).canonical());
      feed("\n");
    }
    return h;
  }

 private:
  void expect_type(const std::string& name, ConfigValue::Type t) const {
    const auto it = values_.find(name);
    if (it == values_.end()) throw ConfigError("unknown config key '" + name + "'");
    if (it->second.type != t)
      throw ConfigError("config key '" + name + "' has the wrong type");
  }

  std::map<std::string, ConfigValue> values_;
};

// --- result records --------------------------------------------------------------

struct ResultRecord {
  std::string id;
  std::uint64_t config_hash = 0;
  std::string version;
  double wall_ms = 0.0;
  json payload;
  std::vector<std::string> files;
};

// Deterministic view of a payload: wall-clock fields stripped, stable dump.
inline void strip_runtime_fields(json& j) {
  if (j.is_object()) {
    j.erase("runtime_ms");
    j.erase("wall_ms");
    for (auto& [k, v] : j.items()) strip_runtime_fields(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_runtime_fields(v);
  }
}

inline std::string payload_fingerprint(const json& payload) {
  json copy = payload;
  strip_runtime_fields(copy);
  return copy.dump();
}

namespace detail {

inline json bound_to_json(const Bound& b) {
  json j;
  if (b.infinite)
    j["value"] = nullptr;
  else
    j["value"] = b.value;
  j["infinite"] = b.infinite;
  j["open"] = b.open;
  return j;
}

inline std::string bound_to_csv(const Bound& b) {
  if (b.infinite) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", b.value);
  return buf;
}

inline json energy_to_json(const char* quantity, const EnergyResult& e,
                           double runtime_ms) {
  json j;
  j["quantity"] = quantity;
  j["s"] = e.s;
  j["method"] = e.method == EnergyMethod::direct ? "direct" : "fourier";
  j["epsilon"] = e.epsilon;
  j["value_re"] = e.value.real();
  j["value_im"] = e.value.imag();
  j["samples"] = e.samples;
  j["runtime_ms"] = runtime_ms;
  return j;
}

class StopWatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// --- measure builders -------------------------------------------------------------

inline DiscreteMeasure build_measure(const ExperimentConfig& cfg,
                                     const std::string& prefix) {
  const int d = static_cast<int>(cfg.get_int("d"));
  const std::string kind = cfg.get_text(prefix + "_kind");
  const double offset = cfg.get_real(prefix + "_offset");
  DiscreteMeasure mu;
  if (kind == "cantor") {
    CantorSpec spec;
    spec.ambient_dim = d;
    spec.branches = static_cast<int>(cfg.get_int("branches"));
    spec.ratio = cfg.get_real("ratio");
    spec.depth = static_cast<int>(cfg.get_int("depth"));
    for (char c : cfg.get_text("axes")) {
      if (c < '0' || c > '9') throw ConfigError("axes must be digit indices");
      spec.active_axes.push_back(c - '0');
    }
    mu = cantor_measure(spec);
  } else if (kind == "circle") {
    if (d != 2) throw ConfigError(prefix + "_kind=circle requires d=2");
    const std::int64_t count = cfg.get_int("atoms");
    if (count < 3) throw ConfigError("circle builder needs atoms >= 3");
    Eigen::MatrixXd pos(count, 2);
    const double r = cfg.get_real("circle_radius");
    for (std::int64_t i = 0; i < count; ++i) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(i) /
                        static_cast<double>(count);
      pos(i, 0) = cfg.get_real("circle_cx") + r * std::cos(th);
      pos(i, 1) = cfg.get_real("circle_cy") + r * std::sin(th);
    }
    Eigen::VectorXd w = Eigen::VectorXd::Constant(count, 1.0 / count);
    mu = DiscreteMeasure(2, std::move(pos), std::move(w), 1.0);
  } else if (kind == "uniform") {
    const std::int64_t count = cfg.get_int("atoms");
    if (count < 1) throw ConfigError("uniform builder needs atoms >= 1");
    CounterRng rng(static_cast<std::uint64_t>(cfg.get_int("seed")),
                   prefix == "mu" ? 0xabcd01u : 0xabcd02u);
    Eigen::MatrixXd pos(count, d);
    for (std::int64_t i = 0; i < count; ++i)
      for (int a = 0; a < d; ++a) pos(i, a) = rng.next_unit();
    Eigen::VectorXd w = Eigen::VectorXd::Constant(count, 1.0 / count);
    mu = DiscreteMeasure(d, std::move(pos), std::move(w), 1.0);
  } else if (kind == "grid") {
    const std::int64_t count = cfg.get_int("atoms");
    const auto side = static_cast<std::int64_t>(
        std::llround(std::pow(static_cast<double>(count), 1.0 / d)));
    const std::int64_t n_side = std::max<std::int64_t>(2, side);
    std::int64_t total = 1;
    for (int a = 0; a < d; ++a) total *= n_side;
    Eigen::MatrixXd pos(total, d);
    for (std::int64_t i = 0; i < total; ++i) {
      std::int64_t rest = i;
      for (int a = 0; a < d; ++a) {
        pos(i, a) = (static_cast<double>(rest % n_side) + 0.5) / n_side;
        rest /= n_side;
      }
    }
    Eigen::VectorXd w = Eigen::VectorXd::Constant(total, 1.0 / total);
    mu = DiscreteMeasure(d, std::move(pos), std::move(w), 1.0);
  } else if (kind == "csv") {
    const std::string path = cfg.get_text(prefix + "_path");
    if (path.empty()) throw ConfigError(prefix + "_kind=csv requires " + prefix + "_path");
    mu = read_measure_csv_file(path);
    if (mu.dim != d)
      throw ConfigError(prefix + ": CSV dimension does not match config d");
  } else {
    throw ConfigError("unknown " + prefix + "_kind '" + kind + "'");
  }
  if (offset != 0.0) {
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(d);
    shift[0] = offset;
    mu = mu.translated(shift);
  }
  return mu;
}

inline GrassmannSample equispaced_lines(std::int64_t count) {
  GrassmannSample g;
  g.ambient_dim = 2;
  g.subspace_dim = 1;
  g.seed = 0;
  g.frames.reserve(count);
  for (std::int64_t j = 0; j < count; ++j) {
    const double th = (static_cast<double>(j) + 0.5) * std::numbers::pi /
                      static_cast<double>(count);
    Eigen::MatrixXd b(2, 1);
    b << std::cos(th), std::sin(th);
    g.frames.emplace_back(2, 1, b);
  }
  return g;
}

// --- experiments -------------------------------------------------------------------

namespace detail {

inline double resolved_grid_h(const ExperimentConfig& cfg) {
  const double h = cfg.get_real("grid_h");
  return h > 0.0 ? h : 0.5 * cfg.get_real("delta");
}

inline MollifierSpec resolved_mollifier(const ExperimentConfig& cfg) {
  MollifierSpec m;
  m.bandwidth = cfg.get_real("delta");
  const std::string prof = cfg.get_text("profile");
  if (prof == "gaussian")
    m.profile = MollifierSpec::Profile::gaussian;
  else if (prof == "bump")
    m.profile = MollifierSpec::Profile::compact_bump;
  else
    throw ConfigError("profile must be gaussian or bump");
  return m;
}

inline GridField mollified(const ExperimentConfig& cfg, const DiscreteMeasure& mu) {
  const MollifierSpec m = resolved_mollifier(cfg);
  return mollify(mu, m, default_grid_for(mu, m.bandwidth, resolved_grid_h(cfg)));
}

inline Eigen::VectorXd eval_point(const ExperimentConfig& cfg, int d) {
  Eigen::VectorXd y(d);
  const char* names[3] = {"y1", "y2", "y3"};
  for (int a = 0; a < d; ++a) y[a] = a < 3 ? cfg.get_real(names[a]) : 0.0;
  return y;
}

json run_energy(const ExperimentConfig& cfg, std::vector<std::string>* files,
                const std::string& stem);
json run_amplitude(const ExperimentConfig& cfg);
json run_project(const ExperimentConfig& cfg, std::vector<std::string>* files,
                 const std::string& stem);
json run_mixed_norm(const ExperimentConfig& cfg, std::vector<std::string>* files,
                    const std::string& stem);
json run_orponen(const ExperimentConfig& cfg);
json run_kaufman(const ExperimentConfig& cfg);
json run_radial_average(const ExperimentConfig& cfg);
json run_mu_z_identity(const ExperimentConfig& cfg);
json run_exponents(const ExperimentConfig& cfg);
json run_region(const ExperimentConfig& cfg, std::vector<std::string>* files,
                const std::string& stem);
json run_jump_figure(const ExperimentConfig& cfg, std::vector<std::string>* files,
                     const std::string& stem);
json run_visibility(const ExperimentConfig& cfg, std::vector<std::string>* files,
                    const std::string& stem);

}  // namespace detail

ResultRecord run(const ExperimentConfig& cfg);
std::vector<ResultRecord> scan(const ExperimentConfig& cfg);

// --- implementation ---------------------------------------------------------------

namespace detail {

inline json run_energy(const ExperimentConfig& cfg, std::vector<std::string>* files,
                       const std::string& stem) {
  const DiscreteMeasure mu = build_measure(cfg, "mu");
  const double s = cfg.get_real("s");
  json payload;
  {
    StopWatch sw;
    const EnergyResult direct = riesz_energy_direct(mu, s, cfg.get_real("epsilon"));
    payload["direct"] = energy_to_json("riesz_energy", direct, sw.ms());
  }
  {
    StopWatch sw;
    const GridField field = mollified(cfg, mu);
    SpectralOptions opts;
    opts.padding = static_cast<int>(cfg.get_int("padding"));
    opts.boundary_tolerance = cfg.get_real("boundary_tol");
    const EnergyResult fourier = riesz_energy_fourier(field, s, opts);
    payload["fourier"] = energy_to_json("riesz_energy", fourier, sw.ms());
    if (cfg.get_int("emit_field") != 0 && files) {
      const std::string path = stem + ".field.bin";
      write_grid_field(field, path);
      files->push_back(path);
    }
  }
  const double dv = payload["direct"]["value_re"].get<double>();
  const double fv = payload["fourier"]["value_re"].get<double>();
  payload["relative_gap"] = std::abs(dv - fv) / std::max(std::abs(dv), 1e-300);
  payload["primary"] = fv;
  if (cfg.get_int("emit_measure") != 0 && files) {
    const std::string path = stem + ".measure.csv";
    write_measure_csv(mu, path);
    files->push_back(path);
  }
  return payload;
}

inline json run_amplitude(const ExperimentConfig& cfg) {
  const DiscreteMeasure mu = build_measure(cfg, "mu");
  const double s = cfg.get_real("s");
  const double eps = cfg.get_real("epsilon");
  StopWatch sw;
  auto probes = default_probes(mu, 0.5 * resolved_grid_h(cfg),
                               static_cast<std::uint64_t>(cfg.get_int("seed")),
                               static_cast<int>(cfg.get_int("probes_extra")));
  probes.push_back(eval_point(cfg, mu.dim));
  const double value = riesz_amplitude(mu, s, probes, eps);
  json payload;
  payload["quantity"] = "riesz_amplitude";
  payload["s"] = s;
  payload["method"] = "probe_max";
  payload["epsilon"] = eps;
  payload["value_re"] = value;
  payload["value_im"] = 0.0;
  payload["samples"] = static_cast<std::int64_t>(probes.size());
  payload["runtime_ms"] = sw.ms();
  payload["primary"] = value;
  return payload;
}

inline json run_project(const ExperimentConfig& cfg, std::vector<std::string>* files,
                        const std::string& stem) {
  const DiscreteMeasure mu = build_measure(cfg, "mu");
  const int n = static_cast<int>(cfg.get_int("n"));
  const GrassmannSample g =
      sample_grassmann(mu.dim, n, 1, static_cast<std::uint64_t>(cfg.get_int("seed")));
  const double bw = cfg.get_real("bandwidth");
  const double h_V = cfg.get_real("grid_h") > 0.0 ? cfg.get_real("grid_h") : 0.5 * bw;
  const double psi = cfg.get_real("psi_factor") * mu.support_radius();
  const ProjectedDensity rho = pushforward_density(mu, g.frames[0], h_V, bw, psi);
  json payload;
  payload["mass"] = rho.integral();
  payload["l1"] = lp_norm(rho, 1.0);
  payload["l2"] = lp_norm(rho, 2.0);
  payload["lp"] = lp_norm(rho, cfg.get_real("p"));
  payload["p"] = cfg.get_real("p");
  payload["cells"] = rho.cell_count();
  payload["primary"] = payload["lp"];
  if (files) {
    const std::string path = stem + ".csv";
    std::ofstream os(path);
    os.precision(17);
    for (int a = 0; a < n; ++a) os << "u" << (a + 1) << ",";
    os << "value\n";
    for (std::int64_t f = 0; f < rho.cell_count(); ++f) {
      std::int64_t rest = f;
      std::vector<std::int64_t> idx(n);
      for (int a = n - 1; a >= 0; --a) {
        idx[a] = rest % rho.shape[a];
        rest /= rho.shape[a];
      }
      for (int a = 0; a < n; ++a) os << rho.coord(a, idx[a]) << ",";
      os << rho.values[f] << "\n";
    }
    files->push_back(path);
  }
  if (cfg.get_int("emit_frames") != 0 && files) {
    const std::string path = stem + ".frames.csv";
    write_grassmann_csv(g, path);
    files->push_back(path);
  }
  return payload;
}

inline json run_mixed_norm(const ExperimentConfig& cfg, std::vector<std::string>* files,
                           const std::string& stem) {
  const DiscreteMeasure mu = build_measure(cfg, "mu");
  const DiscreteMeasure nu = build_measure(cfg, "nu");
  const int n = static_cast<int>(cfg.get_int("n"));
  const GrassmannSample g =
      sample_grassmann(mu.dim, n, cfg.get_int("frames"),
                       static_cast<std::uint64_t>(cfg.get_int("seed")));
  const MixedNormReport rep = mixed_norm(mu, nu, cfg.get_real("p"), cfg.get_real("q"),
                                         g, cfg.get_real("bandwidth"));
  json payload;
  payload["p"] = rep.p;
  payload["q"] = rep.q;
  payload["value"] = rep.value;
  payload["stderr"] = rep.stderr_estimate;
  payload["frames"] = rep.grassmann_count;
  payload["nu_atoms"] = rep.nu_sample_count;
  payload["seed"] = rep.seed;
  payload["bandwidth"] = rep.bandwidth;
  payload["primary"] = rep.value;
  if (files) {
    const std::string path = stem + ".csv";
    std::ofstream os(path);
    os.precision(17);
    os << "p,q,value,stderr,frames,seed,depth,bandwidth\n";
    os << rep.p << "," << rep.q << "," << rep.value << "," << rep.stderr_estimate
       << "," << rep.grassmann_count << "," << rep.seed << ","
       << cfg.get_int("depth") << "," << rep.bandwidth << "\n";
    files->push_back(path);
  }
  if (cfg.get_int("emit_frames") != 0 && files) {
    const std::string path = stem + ".frames.csv";
    write_grassmann_csv(g, path);
    files->push_back(path);
  }
  return payload;
}

inline json run_orponen(const ExperimentConfig& cfg) {
  const DiscreteMeasure mu = build_measure(cfg, "mu");
  const DiscreteMeasure nu = build_measure(cfg, "nu");
  const int n = static_cast<int>(cfg.get_int("n"));
  const GrassmannSample g =
      sample_grassmann(mu.dim, n, cfg.get_int("frames"),
                       static_cast<std::uint64_t>(cfg.get_int("seed")));
  const IdentityCheck chk =
      orponen_check(mu, nu, cfg.get_real("p"), g, cfg.get_real("bandwidth"));
  json payload;
  payload["lhs"] = chk.lhs;
  payload["rhs"] = chk.rhs;
  payload["relative_error"] = chk.relative_error;
  payload["kernel_rhs"] = chk.kernel_rhs;
  payload["kernel_relative_error"] = chk.kernel_relative_error;
  payload["p"] = cfg.get_real("p");
  payload["frames"] = g.count();
  payload["primary"] = chk.relative_error;
  return payload;
}

inline json run_kaufman(const ExperimentConfig& cfg) {
  const int depth = static_cast<int>(cfg.get_int("depth"));
  const double delta = cfg.get_real("delta");
  const double h = resolved_grid_h(cfg);
  const std::int64_t lines = cfg.get_int("frames");

  std::vector<std::pair<std::string, DiscreteMeasure>> measures;
  {
    CantorSpec a;
    a.ambient_dim = 2;
    a.ratio = 1.0 / 3.0;
    a.depth = depth;
    measures.emplace_back("cantor_third", cantor_measure(a));
    CantorSpec b;
    b.ambient_dim = 2;
    b.ratio = 1.0 / 4.0;
    b.depth = depth;
    measures.emplace_back("cantor_quarter", cantor_measure(b));
    ExperimentConfig circ = cfg;
    circ.set_text("mu_kind", "circle");
    circ.set_real("circle_radius", 0.35);
    circ.set_real("circle_cx", 0.5);
    circ.set_real("circle_cy", 0.5);
    circ.set_real("mu_offset", 0.0);
    measures.emplace_back("circle", build_measure(circ, "mu"));
  }

  const GrassmannSample g = equispaced_lines(lines);
  json ratios = json::array();
  std::vector<double> rs;
  for (auto& [name, mu] : measures) {
    const double psi = 1.5 * mu.support_radius();
    std::vector<double> norms(g.count());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < g.count(); ++j) {
      const ProjectedDensity rho =
          pushforward_density(mu, g.frames[j], 0.5 * delta, delta, psi);
      const double l2 = lp_norm(rho, 2.0);
      norms[j] = l2 * l2;
    }
    const double numerator = pairwise_sum(norms) / static_cast<double>(g.count());
    MollifierSpec moll;
    moll.bandwidth = delta;
    const GridField field = mollify(mu, moll, default_grid_for(mu, delta, h));
    const double denominator = riesz_energy_fourier(field, 1.0).value.real();
    const double ratio = numerator / denominator;
    rs.push_back(ratio);
    json row;
    row["measure"] = name;
    row["mean_l2_sq"] = numerator;
    row["energy_1"] = denominator;
    row["ratio"] = ratio;
    ratios.push_back(row);
  }
  const double lo = *std::min_element(rs.begin(), rs.end());
  const double hi = *std::max_element(rs.begin(), rs.end());
  const double mean = pairwise_sum(rs) / static_cast<double>(rs.size());
  json payload;
  payload["ratios"] = ratios;
  payload["spread"] = (hi - lo) / mean;
  payload["mean_ratio"] = mean;
  payload["inv_pi"] = 1.0 / std::numbers::pi;
  payload["primary"] = payload["spread"];
  return payload;
}

inline json run_radial_average(const ExperimentConfig& cfg) {
  const DiscreteMeasure mu = build_measure(cfg, "mu");
  const int n = static_cast<int>(cfg.get_int("n"));
  const GrassmannSample g =
      sample_grassmann(mu.dim, n, cfg.get_int("frames"),
                       static_cast<std::uint64_t>(cfg.get_int("seed")));
  const RadialAverageResult res = average_radial(
      mu, eval_point(cfg, mu.dim), n, g, cfg.get_real("bandwidth"));
  json payload;
  payload["lhs"] = res.lhs;
  payload["rhs"] = res.rhs;
  payload["ratio"] = res.ratio;
  payload["frames"] = g.count();
  payload["primary"] = res.ratio;
  return payload;
}

inline json run_mu_z_identity(const ExperimentConfig& cfg) {
  const DiscreteMeasure mu = build_measure(cfg, "mu");
  const GridField field = mollified(cfg, mu);
  const int d = mu.dim;
  const cplx z{cfg.get_real("z_re"), cfg.get_real("z_im")};
  const double s = cfg.get_real("s");
  json payload;

  // (a) at z = 0 the multiplier collapses to the constant pi^{d/2}/Gamma(d/2)
  {
    const GridField pot = riesz_potential_complex(field, RieszOrder{cplx{0.0, 0.0}});
    const GridField win = crop_field(pot, field.shape);
    const double c = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
    double worst = 0.0;
    const double peak = field.max_abs();
    for (std::int64_t i = 0; i < field.cell_count(); ++i)
      worst = std::max(worst, std::abs(win.samples[i] - c * field.samples[i]));
    payload["z0_max_rel_dev"] = worst / (c * peak);
  }

  // (b) energy ratio of the potential family vs its closed form
  {
    const double expected = energy_ratio_constant(d, s, z);
    const double rhs =
        riesz_energy_fourier(field, s - 2.0 * z.real()).value.real();
    const double lhs = potential_energy_spectral(
        mu, detail::resolved_mollifier(cfg),
        default_grid_for(mu, cfg.get_real("delta"), detail::resolved_grid_h(cfg)),
        z, s, std::max(4, static_cast<int>(cfg.get_int("padding"))));
    payload["energy_s"] = s;
    payload["z_re"] = z.real();
    payload["z_im"] = z.imag();
    payload["lhs_energy"] = lhs;
    payload["rhs_energy"] = rhs;
    payload["ratio"] = lhs / rhs;
    payload["expected_ratio"] = expected;
    payload["ratio_rel_error"] = std::abs(lhs / rhs - expected) / expected;
  }

  // (c) reflection identity on random points away from the poles
  {
    CounterRng rng(static_cast<std::uint64_t>(cfg.get_int("seed")), 0x9a77a);
    double worst = 0.0;
    int accepted = 0;
    while (accepted < 100) {
      const cplx zz{rng.next_uniform(-10.0, 10.0), rng.next_uniform(-10.0, 10.0)};
      if (std::abs(zz.imag()) < 0.2 &&
          std::abs(zz.real() - std::round(zz.real())) < 0.2)
        continue;
      ++accepted;
      const cplx lhs = complex_gamma(zz) * complex_gamma(1.0 - zz) *
                       std::sin(std::numbers::pi * zz) / std::numbers::pi;
      worst = std::max(worst, std::abs(lhs - 1.0));
    }
    payload["gamma_reflection_max_dev"] = worst;
  }
  payload["primary"] = payload["ratio_rel_error"];
  return payload;
}

inline json run_exponents(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.get_int("d"));
  const int n = static_cast<int>(cfg.get_int("n"));
  ExponentInput in;
  in.d = d;
  in.n = n;
  in.s = cfg.get_real("s");
  in.t = cfg.get_real("t");
  in.alpha = cfg.get_real("alpha");
  const FrostmanPair pair{cfg.get_real("s_mu"), cfg.get_real("s_nu")};

  json payload;
  payload["q0"] = bound_to_json(q0(in));
  payload["p_max"] = bound_to_json(p_max(in));
  {
    const Bound base = q0(in);
    if (!base.infinite) {
      const double q = std::max(cfg.get_real("q"), base.value);
      const MixedNormRhsForm rhs = mixed_norm_rhs_form(in, q);
      json r;
      r["q"] = q;
      r["form"] = rhs.energy_form ? "energy" : "amplitude";
      r["order"] = rhs.order;
      payload["rhs_form"] = r;
    }
  }
  payload["p_bound"] = admissible_p_bound(d, n, pair);
  {
    const OptimizeResult opt = optimize_parameters(
        d, n, pair, static_cast<int>(cfg.get_int("resolution")));
    json o;
    o["s_star"] = opt.s_star;
    o["alpha_star"] = opt.alpha_star;
    o["t_star"] = opt.t_star;
    o["p_star"] = opt.p_star;
    o["grid_p"] = opt.grid_p;
    o["agree"] = opt.agree;
    payload["optimize"] = o;
  }
  payload["dov_q"] = dov_exponent(d, n, std::max(in.s, static_cast<double>(n)),
                                  cfg.get_real("alpha"));
  payload["primary"] = payload["p_bound"];
  return payload;
}

inline json run_region(const ExperimentConfig& cfg, std::vector<std::string>* files,
                       const std::string& stem) {
  const int d = static_cast<int>(cfg.get_int("d"));
  const int n = static_cast<int>(cfg.get_int("n"));
  const FrostmanPair pair{cfg.get_real("s_mu"), cfg.get_real("s_nu")};
  const PQRegion region = admissible_pq_region(d, n, pair);
  json payload;
  payload["case"] = region_case_name(region.case_label);
  payload["p_sup"] = bound_to_json(region.p_sup);
  payload["q_sup"] = bound_to_json(region.q_sup);
  payload["t_lo"] = region.t_lo;
  payload["t_hi"] = region.t_hi;
  if (region.coupling) {
    json c;
    c["lhs_numerator"] = region.coupling->lhs_numerator;
    c["p_coefficient"] = region.coupling->p_coefficient;
    c["additive_n"] = region.coupling->additive_n;
    c["rhs_numerator"] = region.coupling->rhs_numerator;
    c["q_coefficient"] = region.coupling->q_coefficient;
    payload["coupling"] = c;
  }
  payload["admits_pq"] = region.admits(cfg.get_real("p"), cfg.get_real("q"));
  payload["primary"] =
      region.p_sup.infinite ? std::numeric_limits<double>::quiet_NaN()
                            : region.p_sup.value;

  if (files) {
    const int res = static_cast<int>(cfg.get_int("resolution"));
    const std::string path = stem + ".csv";
    std::ofstream os(path);
    os.precision(17);
    os << "s_mu,s_nu,case,p_sup,q_sup\n";
    for (int i = 0; i < res; ++i) {
      const double s_mu = (i + 0.5) * d / static_cast<double>(res);
      for (int j = 0; j < res; ++j) {
        const double s_nu = (j + 0.5) * n / static_cast<double>(res);
        os << s_mu << "," << s_nu << ",";
        const bool ok = s_nu > 0.0 && s_nu < n && s_mu > 2.0 * n - s_nu && s_mu < d;
        if (!ok) {
          os << "infeasible,1,1\n";
          continue;
        }
        const PQRegion r = admissible_pq_region(d, n, FrostmanPair{s_mu, s_nu});
        os << region_case_name(r.case_label) << "," << bound_to_csv(r.p_sup) << ","
           << bound_to_csv(r.q_sup) << "\n";
      }
    }
    files->push_back(path);
  }
  return payload;
}

inline json run_jump_figure(const ExperimentConfig& cfg,
                            std::vector<std::string>* files,
                            const std::string& stem) {
  const int d = static_cast<int>(cfg.get_int("d"));
  const int n = static_cast<int>(cfg.get_int("n"));
  const JumpFigure fig =
      jump_figure_data(d, n, static_cast<int>(cfg.get_int("resolution")));
  json payload;
  json poly = json::array();
  for (const auto& v : fig.polygon) poly.push_back({v[0], v[1]});
  payload["polygon"] = poly;
  json seg = json::array();
  for (const auto& sp : fig.segment) {
    json row;
    row["s_mu"] = sp.s_mu;
    row["s_nu"] = sp.s_nu;
    row["p_limit"] = sp.p_limit;
    seg.push_back(row);
  }
  payload["segment"] = seg;
  payload["grid_points"] = static_cast<std::int64_t>(fig.grid.size());
  payload["primary"] = static_cast<double>(fig.polygon.size());

  if (files) {
    {
      const std::string path = stem + ".csv";
      std::ofstream os(path);
      os.precision(17);
      os << "s_mu,s_nu,feasible,p_max\n";
      for (const auto& pt : fig.grid)
        os << pt.s_mu << "," << pt.s_nu << "," << (pt.feasible ? 1 : 0) << ","
           << pt.p_max << "\n";
      files->push_back(path);
    }
    {
      const std::string path = stem + ".segment.csv";
      std::ofstream os(path);
      os.precision(17);
      os << "s_mu,s_nu,p_limit\n";
      for (const auto& sp : fig.segment)
        os << sp.s_mu << "," << sp.s_nu << "," << sp.p_limit << "\n";
      files->push_back(path);
    }
  }
  return payload;
}

inline json run_visibility(const ExperimentConfig& cfg,
                           std::vector<std::string>* files,
                           const std::string& stem) {
  const int d = static_cast<int>(cfg.get_int("d"));
  const int m = static_cast<int>(cfg.get_int("m"));
  const VisibilityReport rep = visibility_thresholds(d, m);
  json payload;
  payload["d"] = d;
  payload["m"] = m;
  payload["threshold_i"] = rep.threshold_i;
  if (rep.threshold_ii)
    payload["threshold_ii"] = *rep.threshold_ii;
  else
    payload["threshold_ii"] = "not applicable";
  {
    const ExceptionalBound eb = rep.exceptional_bound(cfg.get_real("dim_e"));
    json e;
    e["dim_e"] = cfg.get_real("dim_e");
    e["bound"] = eb.value;
    e["boundary"] = eb.boundary;
    payload["exceptional_bound"] = e;
  }
  if (cfg.get_int("trials") > 0) {
    // Monte Carlo coverage of spanned m-planes for the configured measure
    const DiscreteMeasure mu = build_measure(cfg, "mu");
    const double cov = plane_coverage(
        mu, eval_point(cfg, mu.dim), m, cfg.get_int("trials"),
        static_cast<std::uint64_t>(cfg.get_int("seed")),
        cfg.get_real("resolution_angle"), cfg.get_int("ref_count"));
    payload["coverage"] = cov;
  }
  payload["primary"] = rep.threshold_i;

  if (files) {
    const int res = static_cast<int>(cfg.get_int("resolution"));
    const std::string path = stem + ".csv";
    std::ofstream os(path);
    os.precision(17);
    os << "dim_e,bound,boundary\n";
    for (int i = 0; i <= res; ++i) {
      const double dim_e = rep.threshold_i + (d - rep.threshold_i) * i /
                                                 static_cast<double>(res);
      const ExceptionalBound eb = rep.exceptional_bound(dim_e);
      os << dim_e << "," << eb.value << "," << (eb.boundary ? 1 : 0) << "\n";
    }
    files->push_back(path);
  }
  return payload;
}

}  // namespace detail

inline ResultRecord run(const ExperimentConfig& cfg) {
  const std::string kind = cfg.get_text("kind");
  if (kind.empty()) throw ConfigError("config field 'kind' is required");
#ifdef _OPENMP
  if (cfg.get_int("threads") > 0)
    omp_set_num_threads(static_cast<int>(cfg.get_int("threads")));
#endif

  ResultRecord rec;
  rec.config_hash = cfg.hash();
  rec.version = FROSTLAB_VERSION;
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%08llx",
                  static_cast<unsigned long long>(rec.config_hash & 0xffffffffULL));
    rec.id = kind + "-" + buf;
  }
  const std::string out_dir = cfg.get_text("out_dir");
  std::filesystem::create_directories(out_dir);
  const std::string stem = out_dir + "/" + rec.id;

  detail::StopWatch sw;
  if (kind == "energy")
    rec.payload = detail::run_energy(cfg, &rec.files, stem);
  else if (kind == "amplitude")
    rec.payload = detail::run_amplitude(cfg);
  else if (kind == "project")
    rec.payload = detail::run_project(cfg, &rec.files, stem);
  else if (kind == "mixed-norm")
    rec.payload = detail::run_mixed_norm(cfg, &rec.files, stem);
  else if (kind == "orponen-check")
    rec.payload = detail::run_orponen(cfg);
  else if (kind == "kaufman-check")
    rec.payload = detail::run_kaufman(cfg);
  else if (kind == "radial-average")
    rec.payload = detail::run_radial_average(cfg);
  else if (kind == "mu-z-identity")
    rec.payload = detail::run_mu_z_identity(cfg);
  else if (kind == "exponents")
    rec.payload = detail::run_exponents(cfg);
  else if (kind == "region")
    rec.payload = detail::run_region(cfg, &rec.files, stem);
  else if (kind == "jump-figure")
    rec.payload = detail::run_jump_figure(cfg, &rec.files, stem);
  else if (kind == "visibility")
    rec.payload = detail::run_visibility(cfg, &rec.files, stem);
  else if (kind == "scan")
    throw ConfigError("run: scan configs go through scan()");
  else
    throw ConfigError("unknown experiment kind '" + kind + "'");
  rec.wall_ms = sw.ms();

  json doc;
  doc["meta"] = {{"id", rec.id},
                 {"config_hash", rec.config_hash},
                 {"version", rec.version},
                 {"wall_ms", rec.wall_ms},
                 {"config", cfg.to_json()}};
  doc["payload"] = rec.payload;
  const std::string path = stem + ".json";
  std::ofstream os(path);
  os << doc.dump(2) << "\n";
  rec.files.insert(rec.files.begin(), path);
  return rec;
}

inline std::vector<ResultRecord> scan(const ExperimentConfig& cfg) {
  const std::string knob = cfg.get_text("scan_knob");
  const std::string base_kind = cfg.get_text("base_kind");
  const std::int64_t steps = cfg.get_int("scan_steps");
  if (knob.empty()) throw ConfigError("scan: scan_knob is required");
  if (base_kind.empty() || base_kind == "scan")
    throw ConfigError("scan: base_kind must name a non-scan experiment");
  if (steps < 1) throw ConfigError("scan: empty range (scan_steps < 1)");
  const auto& spec = ExperimentConfig::spec_for(knob);
  if (spec.def.type == ConfigValue::Type::text)
    throw ConfigError("scan: cannot scan text knob '" + knob + "'");

  const double from = cfg.get_real("scan_from");
  const double to = cfg.get_real("scan_to");
  std::vector<ResultRecord> records;
  std::vector<double> knob_values;
  for (std::int64_t i = 0; i < steps; ++i) {
    const double v =
        steps == 1 ? from : from + (to - from) * static_cast<double>(i) / (steps - 1);
    ExperimentConfig point = cfg;
    point.set_text("kind", base_kind);
    point.set_text("scan_knob", "");
    point.set_text("base_kind", "");
    point.set_int("scan_steps", 0);
    point.set_real("scan_from", 0.0);
    point.set_real("scan_to", 0.0);
    if (spec.def.type == ConfigValue::Type::integer) {
      point.set_int(knob, static_cast<std::int64_t>(std::llround(v)));
      knob_values.push_back(static_cast<double>(std::llround(v)));
    } else {
      point.set_real(knob, v);
      knob_values.push_back(v);
    }
    records.push_back(run(point));
  }

  // one CSV with one row per range point; depth scans also get the
  // successive-ratio divergence diagnostic
  const std::string out_dir = cfg.get_text("out_dir");
  std::filesystem::create_directories(out_dir);
  ExperimentConfig self = cfg;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%08llx",
                static_cast<unsigned long long>(self.hash() & 0xffffffffULL));
  const std::string path = out_dir + "/scan-" + std::string(buf) + ".csv";
  std::ofstream os(path);
  os.precision(17);
  const bool ratio_column = knob == "depth";
  os << knob << ",primary";
  if (ratio_column) os << ",successive_ratio";
  os << "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double primary = records[i].payload.contains("primary")
                               ? records[i].payload["primary"].get<double>()
                               : std::numeric_limits<double>::quiet_NaN();
    os << knob_values[i] << "," << primary;
    if (ratio_column) {
      if (i == 0)
        os << ",";
      else {
        const double prev = records[i - 1].payload["primary"].get<double>();
        os << "," << (prev != 0.0 ? primary / prev
                                  : std::numeric_limits<double>::quiet_NaN());
      }
    }
    os << "\n";
  }
  return records;
}

}  // namespace frostlab
