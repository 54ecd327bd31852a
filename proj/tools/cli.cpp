#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "holobec/errors.hpp"
#include "holobec/evolution.hpp"
#include "holobec/geometry.hpp"
#include "holobec/hamiltonian.hpp"
#include "holobec/perturbation.hpp"

namespace holobec::cli {

namespace {

using json = nlohmann::json;
using Mode = Comparison::Mode;

constexpr double kPi = std::numbers::pi;
// pi/3 rounded so that the echo reads back bit-identically.
constexpr double kThirdPi = 1.0471975511965976;

KeySpec real(std::string name, double v, std::string help) { return {std::move(name), Kind::real, v, std::move(help)}; }
KeySpec integer(std::string name, long long v, std::string help) {
  return {std::move(name), Kind::integer, v, std::move(help)};
}
KeySpec boolean(std::string name, bool v, std::string help) {
  return {std::move(name), Kind::boolean, v, std::move(help)};
}
KeySpec text(std::string name, std::string v, std::string help) {
  return {std::move(name), Kind::text, std::move(v), std::move(help)};
}

std::vector<KeySpec> base_schema(const std::string& e) {
  if (e == "berry") {
    return {real("j", 5, "total spin"),
            real("m", 1, "followed level"),
            real("theta", kThirdPi, "polar angle of the loop (rad)"),
            real("alpha0", 100, "linear coefficient"),
            real("beta0", 0, "nonlinear coefficient; nonzero selects the conjugated nonlinear Hamiltonian"),
            real("T", 400, "loop duration"),
            integer("steps", 40000, "propagation steps"),
            text("profile", "smooth", "linear | smooth"),
            integer("K", 64, "path-ordered segments"),
            integer("flux_steps", 32, "flux quadrature nodes per axis"),
            real("tolerance", 2e-3, "adiabatic phase tolerance (rad)"),
            real("quadrature_tolerance", 1e-4, "flux and path-ordered tolerance (rad)"),
            boolean("converge", false, "double T until the phase settles"),
            real("converge_tol", 1e-3, "phase change that ends the doubling study"),
            integer("max_doublings", 6, "doubling limit")};
  }
  if (e == "detect") {
    return {real("j", 1, "total spin"),
            real("theta", kThirdPi, "loop polar angle (rad)"),
            real("alpha0", 10, "linear coefficient"),
            real("T", 200, "time under the Hamiltonian"),
            integer("steps", 20000, "propagation steps"),
            boolean("snap", true, "round T up so alpha0*T is a multiple of 2 pi"),
            text("ramp", "both", "instantaneous | adiabatic | both"),
            text("profile", "smooth", "linear | smooth"),
            real("tolerance", 0.02, "population tolerance"),
            real("phase_tolerance", 1e-6, "allowed distance of alpha0*T from 2 pi Z")};
  }
  if (e == "holonomy") {
    return {real("j", 10, "total spin"),
            real("m", 0, "lower level of the degenerate pair"),
            real("theta0", kThirdPi, "rectangle base (rad)"),
            real("dtheta", 0, "theta1 - theta0; 0 selects pi/(2 rho)"),
            integer("K", 16, "path-ordered segments per side"),
            integer("n_phi", 128, "Stokes grid"),
            integer("n_theta", 128, "Stokes grid"),
            real("stokes_tolerance", 1e-3, "Frobenius tolerance, Stokes vs path-ordered"),
            real("closed_tolerance", 0, "Frobenius tolerance, closed form vs path-ordered; 0 selects 4/rho"),
            boolean("adiabatic", false, "also simulate the loop"),
            real("beta0", 1, "nonlinear coefficient for the simulation"),
            real("T", 1000, "simulated loop duration"),
            integer("steps", 20000, "propagation steps"),
            real("adiabatic_tolerance", 0.05, "Frobenius tolerance, simulation vs path-ordered"),
            real("leakage_threshold", 1e-3, "allowed population outside the pair")};
  }
  if (e == "transfer") {
    return {real("j", 50, "total spin"),
            real("m", 0, "lower level of the degenerate pair"),
            real("theta0", kThirdPi, "rectangle base (rad)"),
            real("fraction", 0.5, "theta1 - theta0 = fraction * pi / rho"),
            boolean("adiabatic", true, "also simulate the loop"),
            real("beta0", 1, "nonlinear coefficient for the simulation"),
            real("T", 1000, "simulated loop duration"),
            integer("steps", 20000, "propagation steps"),
            integer("K", 16, "path-ordered segments per side"),
            real("tolerance", 0.1, "probability tolerance against sin^2(pi fraction)"),
            real("leakage_threshold", 1e-3, "allowed population outside the pair")};
  }
  if (e == "stokes") {
    return {real("j", 5, "total spin"),
            real("m", 0, "lower level of the degenerate pair"),
            real("theta0", kThirdPi, "rectangle base (rad)"),
            real("dtheta", 0, "theta1 - theta0; 0 selects pi/(2 rho)"),
            real("dphi", 0, "phi1 - phi0; 0 selects pi/(rho sin theta0)"),
            integer("K", 16, "path-ordered segments per side"),
            integer("n_phi", 128, "Stokes grid"),
            integer("n_theta", 128, "Stokes grid"),
            real("h", 1e-5, "finite-difference step for the curvature"),
            real("tolerance", 1e-3, "Frobenius tolerance")};
  }
  if (e == "perturbation") {
    return {real("j", 5, "total spin"),
            real("alpha0", 1, "linear coefficient"),
            real("beta0", 0.05, "nonlinear coefficient"),
            real("gamma", 0.01, "weak coupling, in (0, 0.1]"),
            integer("n_max", 60, "series truncation order"),
            integer("seed", 1, "seed for the random identity draws"),
            integer("draws", 20, "random parameter draws"),
            real("identity_tolerance", 1e-12, "max entry error of i[G, H0] - Jx"),
            real("series_tolerance", 1e-8, "truncated vs resummed max entry error"),
            real("ratio_tolerance", 0.5, "allowed distance of the residual ratio from 4")};
  }
  throw ConfigError("experiment", "unknown experiment '" + e + "'");
}

const KeySpec* find_spec(const std::vector<KeySpec>& specs, const std::string& key) {
  for (const auto& s : specs)
    if (s.name == key) return &s;
  return nullptr;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::boolean: return "boolean";
    case Kind::integer: return "integer";
    case Kind::real: return "number";
    case Kind::text: return "string";
  }
  return "value";
}

Value from_string(const KeySpec& spec, const std::string& s) {
  auto bad = [&]() {
    return ConfigError(spec.name, "key '" + spec.name + "' expects a " + kind_name(spec.kind) + ", got '" + s + "'");
  };
  switch (spec.kind) {
    case Kind::boolean:
      if (s == "true" || s == "1") return true;
      if (s == "false" || s == "0") return false;
      throw bad();
    case Kind::integer: {
      long long v = 0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw bad();
      return v;
    }
    case Kind::real: {
      double v = 0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw bad();
      return v;
    }
    case Kind::text:
      return s;
  }
  throw bad();
}

Value from_json(const KeySpec& spec, const json& j) {
  auto bad = [&]() {
    return ConfigError(spec.name, "key '" + spec.name + "' expects a " + kind_name(spec.kind) + ", got " + j.dump());
  };
  switch (spec.kind) {
    case Kind::boolean:
      if (!j.is_boolean()) throw bad();
      return j.get<bool>();
    case Kind::integer:
      if (!j.is_number_integer()) throw bad();
      return j.get<long long>();
    case Kind::real:
      if (!j.is_number()) throw bad();
      return j.get<double>();
    case Kind::text:
      if (!j.is_string()) throw bad();
      return j.get<std::string>();
  }
  throw bad();
}

json value_json(const Value& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

void require(bool ok, const std::string& key, const std::string& constraint) {
  if (!ok) throw ConfigError(key, "invalid value for key '" + key + "': " + constraint);
}

bool is_half_integer(double x) { return std::isfinite(x) && std::abs(2 * x - std::round(2 * x)) < 1e-12; }

void validate_spin(const ExperimentConfig& c) {
  const double j = c.real("j");
  require(is_half_integer(j) && j >= 0.5 && j <= 1000, "j", "must be a positive half-integer <= 1000");
}

void validate_level(const ExperimentConfig& c, bool pair) {
  const double j = c.real("j"), m = c.real("m");
  require(is_half_integer(m) && std::abs(j - m - std::round(j - m)) < 1e-12, "m", "must differ from j by an integer");
  require(m >= -j && m <= (pair ? j - 1 : j), "m", pair ? "must satisfy -j <= m <= j - 1" : "must satisfy |m| <= j");
}

void validate_positive(const ExperimentConfig& c, const std::string& key) {
  const double v = c.real(key);
  require(std::isfinite(v) && v > 0, key, "must be finite and > 0");
}

void validate_finite(const ExperimentConfig& c, const std::string& key) {
  require(std::isfinite(c.real(key)), key, "must be finite");
}

void validate_steps(const ExperimentConfig& c) {
  const long long s = c.integer("steps");
  require(s >= 100 && s <= 100000000, "steps", "must lie in [100, 1e8]");
}

void validate_choice(const ExperimentConfig& c, const std::string& key, std::initializer_list<const char*> options) {
  const auto& v = c.text(key);
  std::string list;
  for (const char* o : options) {
    if (v == o) return;
    list += list.empty() ? o : std::string(" | ") + o;
  }
  require(false, key, "must be one of " + list);
}

void validate_theta0(const ExperimentConfig& c) {
  const double t = c.real("theta0");
  require(std::isfinite(t) && t > 0 && t < kPi, "theta0", "must lie in (0, pi)");
}

void validate(const ExperimentConfig& c) {
  const auto& e = c.experiment;
  if (e == "sweep") {
    require(c.text("axis1") != "", "axis1", "a sweep needs at least one axis");
    return;
  }
  validate_spin(c);
  if (e == "berry") {
    validate_level(c, false);
    validate_finite(c, "theta");
    validate_finite(c, "beta0");
    require(std::isfinite(c.real("alpha0")) && c.real("alpha0") != 0, "alpha0", "must be finite and nonzero");
    validate_positive(c, "T");
    validate_steps(c);
    validate_choice(c, "profile", {"linear", "smooth"});
    require(c.integer("K") >= 8, "K", "must be >= 8");
    require(c.integer("flux_steps") >= 16, "flux_steps", "must be >= 16");
    for (const char* k : {"tolerance", "quadrature_tolerance", "converge_tol"}) validate_positive(c, k);
    require(c.integer("max_doublings") >= 1 && c.integer("max_doublings") <= 12, "max_doublings", "must lie in [1, 12]");
  } else if (e == "detect") {
    validate_finite(c, "theta");
    require(std::isfinite(c.real("alpha0")) && c.real("alpha0") != 0, "alpha0", "must be finite and nonzero");
    validate_positive(c, "T");
    validate_steps(c);
    validate_choice(c, "ramp", {"instantaneous", "adiabatic", "both"});
    validate_choice(c, "profile", {"linear", "smooth"});
    validate_positive(c, "tolerance");
    validate_positive(c, "phase_tolerance");
  } else if (e == "holonomy" || e == "transfer" || e == "stokes") {
    validate_level(c, true);
    validate_theta0(c);
    require(c.integer("K") >= 2, "K", "must be >= 2");
    if (e != "transfer") {
      require(std::isfinite(c.real("dtheta")), "dtheta", "must be finite");
      require(c.integer("n_phi") >= 1 && c.integer("n_theta") >= 1, "n_phi", "Stokes grid must be at least 1x1");
    }
    if (e == "stokes") {
      require(std::isfinite(c.real("dphi")), "dphi", "must be finite");
      validate_positive(c, "tolerance");
      require(c.real("h") >= 1e-7 && c.real("h") <= 1e-3, "h", "must lie in [1e-7, 1e-3]");
    }
    if (e == "holonomy") {
      validate_positive(c, "stokes_tolerance");
      require(c.real("closed_tolerance") >= 0, "closed_tolerance", "must be >= 0");
      validate_positive(c, "adiabatic_tolerance");
    }
    if (e == "transfer") {
      require(std::isfinite(c.real("fraction")) && c.real("fraction") > 0 && c.real("fraction") <= 1, "fraction",
              "must lie in (0, 1]");
      validate_positive(c, "tolerance");
    }
    if (e != "stokes") {
      require(std::isfinite(c.real("beta0")) && c.real("beta0") != 0, "beta0", "must be finite and nonzero");
      validate_positive(c, "T");
      validate_steps(c);
      validate_positive(c, "leakage_threshold");
    }
  } else if (e == "perturbation") {
    require(std::isfinite(c.real("alpha0")) && c.real("alpha0") != 0, "alpha0", "must be finite and nonzero");
    validate_finite(c, "beta0");
    require(c.real("gamma") > 0 && c.real("gamma") <= 0.1, "gamma", "must lie in (0, 0.1]");
    require(c.integer("n_max") >= 0 && c.integer("n_max") <= 400, "n_max", "must lie in [0, 400]");
    require(c.integer("draws") >= 0 && c.integer("draws") <= 10000, "draws", "must lie in [0, 10000]");
    for (const char* k : {"identity_tolerance", "series_tolerance", "ratio_tolerance"}) validate_positive(c, k);
    const SpinSystem sys = SpinSystem::from_j(c.real("j"));
    const double a0 = c.real("alpha0"), b0 = c.real("beta0");
    for (int i = 0; i + 1 < sys.dim(); ++i) {
      require(std::abs(a0 + b0 * (sys.m_at(i) + sys.m_at(i + 1))) > 1e-6, "beta0",
              "alpha0/beta0 must not make H0 degenerate (alpha0 + beta0 (m + m') != 0)");
    }
  }
}

std::string sweep_base(const json& file, const Overrides& overrides) {
  std::string base = "berry";
  if (file.contains("base")) {
    if (!file["base"].is_string()) throw ConfigError("base", "key 'base' expects a string");
    base = file["base"].get<std::string>();
  }
  for (const auto& [k, v] : overrides)
    if (k == "base") base = v;
  if (base == "sweep") throw ConfigError("base", "invalid value for key 'base': sweeps cannot be nested");
  return base;
}

// ---------------------------------------------------------------------------
// JSON helpers

json phase_json(double raw) {
  const PhaseValue p = make_phase(raw);
  return {{"raw", p.raw}, {"wrapped", p.wrapped}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

json rectangle_json(const Rectangle& r) {
  return {{"phi0", r.phi0}, {"phi1", r.phi1}, {"theta0", r.theta0}, {"theta1", r.theta1}};
}

void require_finite_json(const json& j, const std::string& path) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>())) throw std::domain_error("non-finite value at " + path);
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) require_finite_json(it.value(), path + "." + it.key());
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) require_finite_json(j[i], path + "[" + std::to_string(i) + "]");
  }
}

double unitarity_error(const Matrix& u) { return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm(); }

Profile profile_of(const std::string& s) { return s == "linear" ? Profile::linear : Profile::smooth; }

// ---------------------------------------------------------------------------
// Experiments

void run_berry(const ExperimentConfig& c, ResultRecord& out) {
  const SpinSystem sys = SpinSystem::from_j(c.real("j"));
  const double m = c.real("m"), theta = c.real("theta");
  const double closed = berry_phase_closed(m, theta).raw;
  const double flux = berry_phase_flux(m, theta, static_cast<int>(c.integer("flux_steps"))).raw;
  const auto field = analytic_connection(sys, DegenerateSubspace::single(sys, m));
  const double path =
      std::arg(holonomy_path_ordered(field, LoopPath::circle_at_theta(theta, static_cast<int>(c.integer("K")))).u(0, 0));

  BerryRunSettings s;
  s.m = m;
  s.theta = theta;
  s.alpha0 = c.real("alpha0");
  s.beta0 = c.real("beta0");
  s.duration = c.real("T");
  s.steps = static_cast<int>(c.integer("steps"));
  s.profile = profile_of(c.text("profile"));
  const double dt = s.duration / s.steps;

  BerryRun last;
  double last_t = s.duration;
  if (c.flag("converge")) {
    const auto study = converge_in_duration(
        [&](double t) {
          BerryRunSettings local = s;
          local.duration = t;
          local.steps = static_cast<int>(std::llround(t / dt));
          last = adiabatic_berry_phase(sys, local);
          last_t = t;
          return last.phases.geometric;
        },
        s.duration, c.real("converge_tol"), static_cast<int>(c.integer("max_doublings")));
    json errs = json::array();
    for (double v : study.values) errs.push_back(phase_distance(v, closed));
    out.results["study"] = {{"durations", study.durations}, {"geometric", study.values},
                            {"changes", study.changes},     {"errors", errs},
                            {"converged", study.converged}};
    if (!study.converged) out.warnings.push_back("T doubling did not settle within max_doublings");
  } else {
    last = adiabatic_berry_phase(sys, s);
  }

  out.results["closed_form"] = phase_json(closed);
  out.results["flux"] = phase_json(flux);
  out.results["path_ordered"] = phase_json(path);
  out.results["adiabatic"] = {{"geometric", phase_json(last.phases.geometric)},
                              {"dynamical", phase_json(last.phases.dynamical)},
                              {"total", phase_json(last.phases.total)},
                              {"overlap", last.phases.overlap},
                              {"T", last_t},
                              {"steps", static_cast<long long>(std::llround(last_t / dt))},
                              {"max_norm_error", last.max_norm_error}};

  out.comparisons.push_back(Comparison::make("flux_vs_closed", flux, closed, c.real("quadrature_tolerance"), Mode::match));
  out.comparisons.push_back(
      Comparison::make("path_ordered_vs_closed", path, closed, c.real("quadrature_tolerance"), Mode::circular));
  out.comparisons.push_back(
      Comparison::make("adiabatic_vs_closed", last.phases.geometric, closed, c.real("tolerance"), Mode::circular));
  out.comparisons.push_back(Comparison::make("norm_error", last.max_norm_error, 0.0, 1e-10, Mode::at_most));
}

void run_detect(const ExperimentConfig& c, ResultRecord& out) {
  const SpinSystem sys = SpinSystem::from_j(c.real("j"));
  DetectionSettings d;
  d.theta = c.real("theta");
  d.alpha0 = c.real("alpha0");
  d.duration = c.flag("snap") ? snap_duration(d.alpha0, c.real("T")) : c.real("T");
  d.steps = static_cast<int>(c.integer("steps"));
  d.profile = profile_of(c.text("profile"));
  d.phase_tolerance = c.real("phase_tolerance");

  const auto ideal = detection_prediction(sys, d.theta);
  double ideal_b = 0.0;
  for (int k = 0; k < sys.dim(); ++k) ideal_b += ideal[k] * fock_map(sys, sys.m_at(k)).n_b;
  out.results["T_effective"] = d.duration;
  out.results["total_atoms"] = sys.two_j();
  out.results["prediction"] = {{"populations", ideal}, {"overlap_jj", ideal.back()}, {"mode_b_population", ideal_b}};

  std::vector<RampMode> modes;
  const auto& ramp = c.text("ramp");
  if (ramp != "adiabatic") modes.push_back(RampMode::instantaneous);
  if (ramp != "instantaneous") modes.push_back(RampMode::adiabatic);
  const double tol = c.real("tolerance");
  for (RampMode mode : modes) {
    d.ramp = mode;
    const auto rep = detection_protocol(sys, d);
    const std::string name = to_string(mode);
    json labels = json::array();
    for (const auto& f : rep.fock_labels) labels.push_back({f.n_a, f.n_b});
    double worst = 0.0;
    for (int k = 0; k < sys.dim(); ++k) worst = std::max(worst, std::abs(rep.populations[k] - ideal[k]));
    out.results[name] = {{"populations", rep.populations},
                         {"fock_labels", labels},
                         {"overlap_jj", rep.overlap_jj},
                         {"mode_b_population", rep.mode_b_population},
                         {"dynamical_residual", rep.dynamical_residual},
                         {"max_norm_error", rep.max_norm_error}};
    if (rep.warning) out.warnings.push_back(name + ": " + *rep.warning);
    out.comparisons.push_back(Comparison::make(name + ".max_population_error", worst, 0.0, tol, Mode::at_most));
    out.comparisons.push_back(Comparison::make(name + ".overlap_jj", rep.overlap_jj, ideal.back(), tol, Mode::match));
    out.comparisons.push_back(Comparison::make(name + ".mode_b_population", rep.mode_b_population, ideal_b,
                                               tol * sys.two_j(), Mode::match));
    out.comparisons.push_back(Comparison::make(name + ".norm_error", rep.max_norm_error, 0.0, 1e-10, Mode::at_most));
  }
}

struct PairSetup {
  SpinSystem sys;
  double m;
  double rho;
  Rectangle rect;
  ConnectionField field;
};

PairSetup pair_setup(const ExperimentConfig& c, double dtheta, double dphi) {
  const SpinSystem sys = SpinSystem::from_j(c.real("j"));
  const double m = c.real("m");
  const double r = rho(sys, m);
  const double t0 = c.real("theta0");
  Rectangle rect = transfer_rectangle(sys, m, t0, t0 + (dtheta != 0 ? dtheta : kPi / (2 * r)));
  if (dphi != 0) rect.phi1 = rect.phi0 + dphi;
  return {sys, m, r, rect, analytic_connection(sys, DegenerateSubspace::pair(sys, m))};
}

AdiabaticHolonomyResult simulate_pair(const ExperimentConfig& c, const PairSetup& p) {
  AdiabaticHolonomySettings s;
  s.m = p.m;
  s.beta0 = c.real("beta0");
  s.rect = p.rect;
  s.duration = c.real("T");
  s.steps = static_cast<int>(c.integer("steps"));
  s.leakage_threshold = c.real("leakage_threshold");
  return adiabatic_holonomy(p.sys, s);
}

void add_unitarity(ResultRecord& out, const std::string& name, const Matrix& u) {
  out.comparisons.push_back(Comparison::make(name + ".unitarity_error", unitarity_error(u), 0.0, 1e-10, Mode::at_most));
}

void run_holonomy(const ExperimentConfig& c, ResultRecord& out) {
  const PairSetup p = pair_setup(c, c.real("dtheta"), 0.0);
  const auto po = holonomy_path_ordered(p.field, LoopPath::rectangle(p.rect, static_cast<int>(c.integer("K"))));
  const auto cf = holonomy_closed_form(p.sys, p.m, p.rect.theta0, p.rect.theta1);
  const StokesGrid grid{static_cast<int>(c.integer("n_phi")), static_cast<int>(c.integer("n_theta"))};
  const auto st = holonomy_stokes(p.field, p.rect, grid);
  const double closed_tol = c.real("closed_tolerance") > 0 ? c.real("closed_tolerance") : 4.0 / p.rho;

  out.results["rho"] = p.rho;
  out.results["rectangle"] = rectangle_json(p.rect);
  out.results["path_ordered"] = matrix_json(po.u);
  out.results["closed_form"] = matrix_json(cf.u);
  out.results["stokes"] = matrix_json(st.u);
  out.comparisons.push_back(Comparison::make("stokes_vs_path_ordered", frobenius_distance(st.u, po.u), 0.0,
                                             c.real("stokes_tolerance"), Mode::at_most));
  out.comparisons.push_back(Comparison::make("closed_form_vs_path_ordered", frobenius_distance(cf.u, po.u), 0.0,
                                             closed_tol, Mode::at_most));
  add_unitarity(out, "path_ordered", po.u);
  add_unitarity(out, "closed_form", cf.u);
  add_unitarity(out, "stokes", st.u);

  if (c.flag("adiabatic")) {
    const auto sim = simulate_pair(c, p);
    out.results["adiabatic"] = {{"holonomy", matrix_json(sim.holonomy.u)},
                                {"leakage", sim.leakage},
                                {"max_leakage", sim.max_leakage},
                                {"unitarity_error", sim.unitarity_error},
                                {"max_norm_error", sim.max_norm_error}};
    out.comparisons.push_back(Comparison::make("adiabatic_vs_path_ordered", frobenius_distance(sim.holonomy.u, po.u),
                                               0.0, c.real("adiabatic_tolerance"), Mode::at_most));
    out.comparisons.push_back(
        Comparison::make("adiabatic.norm_error", sim.max_norm_error, 0.0, 1e-10, Mode::at_most));
  }
}

void run_transfer(const ExperimentConfig& c, ResultRecord& out) {
  const SpinSystem sys = SpinSystem::from_j(c.real("j"));
  const double r = rho(sys, c.real("m"));
  const double fraction = c.real("fraction");
  const PairSetup p = pair_setup(c, fraction * kPi / r, 0.0);
  const double predicted = std::pow(std::sin(kPi * fraction), 2);
  const double tol = c.real("tolerance");

  auto report = [&](const std::string& name, const Matrix& u) {
    const double moved = std::norm(u(1, 0));
    const double stayed = std::norm(u(0, 0));
    out.results[name] = {{"holonomy", matrix_json(u)}, {"transfer_probability", moved}, {"retention", stayed}};
    out.comparisons.push_back(Comparison::make(name + ".transfer_probability", moved, predicted, tol, Mode::match));
    out.comparisons.push_back(Comparison::make(name + ".retention", stayed, 1.0 - predicted, tol, Mode::match));
  };

  out.results["rho"] = r;
  out.results["rectangle"] = rectangle_json(p.rect);
  out.results["predicted_transfer"] = predicted;
  report("closed_form", holonomy_closed_form(p.sys, p.m, p.rect.theta0, p.rect.theta1).u);
  report("path_ordered",
         holonomy_path_ordered(p.field, LoopPath::rectangle(p.rect, static_cast<int>(c.integer("K")))).u);
  if (c.flag("adiabatic")) {
    const auto sim = simulate_pair(c, p);
    report("adiabatic", sim.holonomy.u);
    out.results["adiabatic"]["leakage"] = sim.leakage;
    out.results["adiabatic"]["max_leakage"] = sim.max_leakage;
    out.results["adiabatic"]["max_norm_error"] = sim.max_norm_error;
  }
}

void run_stokes(const ExperimentConfig& c, ResultRecord& out) {
  const PairSetup p = pair_setup(c, c.real("dtheta"), c.real("dphi"));
  const auto po = holonomy_path_ordered(p.field, LoopPath::rectangle(p.rect, static_cast<int>(c.integer("K"))));
  const StokesGrid grid{static_cast<int>(c.integer("n_phi")), static_cast<int>(c.integer("n_theta"))};
  const auto st = holonomy_stokes(p.field, p.rect, grid, c.real("h"));
  out.results["rectangle"] = rectangle_json(p.rect);
  out.results["path_ordered"] = matrix_json(po.u);
  out.results["stokes"] = matrix_json(st.u);
  out.comparisons.push_back(
      Comparison::make("stokes_vs_path_ordered", frobenius_distance(st.u, po.u), 0.0, c.real("tolerance"), Mode::at_most));
  add_unitarity(out, "stokes", st.u);
}

double identity_error(const SpinSystem& sys, double a0, double b0) {
  const Operator g = generator_resummed(sys, a0, b0);
  const Matrix lhs = kI * commutator(g, build_h0(sys, a0, b0)).matrix();
  return (lhs - build_spin_operators(sys).jx.matrix()).cwiseAbs().maxCoeff();
}

void run_perturbation(const ExperimentConfig& c, ResultRecord& out) {
  const SpinSystem sys = SpinSystem::from_j(c.real("j"));
  const double a0 = c.real("alpha0"), b0 = c.real("beta0"), g = c.real("gamma");
  const double r1 = first_order_check(sys, a0, b0, g);
  const double r2 = first_order_check(sys, a0, b0, g / 2);
  const double ratio = r1 / r2;
  const double conv = convergence_ratio(sys, a0, b0);
  out.results["residual"] = r1;
  out.results["residual_half_gamma"] = r2;
  out.results["residual_ratio"] = ratio;
  out.results["convergence_ratio"] = conv;
  out.comparisons.push_back(Comparison::make("residual_ratio", ratio, 4.0, c.real("ratio_tolerance"), Mode::match));

  const auto truncated = generator_truncated(sys, a0, b0, static_cast<int>(c.integer("n_max")));
  const Matrix resummed = generator_resummed(sys, a0, b0).matrix();
  const double series_err = (truncated.g.matrix() - resummed).cwiseAbs().maxCoeff();
  out.results["series_error"] = series_err;
  if (truncated.divergence_warning) {
    out.warnings.push_back(*truncated.divergence_warning);
  } else {
    out.comparisons.push_back(
        Comparison::make("series_vs_resummed", series_err, 0.0, c.real("series_tolerance"), Mode::at_most));
  }

  const double id_tol = c.real("identity_tolerance");
  out.comparisons.push_back(Comparison::make("commutator_identity", identity_error(sys, a0, b0), 0.0, id_tol, Mode::at_most));

  std::mt19937_64 rng(static_cast<std::uint64_t>(c.integer("seed")));
  std::uniform_int_distribution<int> two_j(1, 20);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  double worst = 0.0;
  json draws = json::array();
  for (long long i = 0; i < c.integer("draws");) {
    const SpinSystem s(two_j(rng));
    const double a = coef(rng), b = coef(rng);
    bool valid = std::abs(a) > 1e-3;
    for (int k = 0; k + 1 < s.dim(); ++k) valid = valid && std::abs(a + b * (s.m_at(k) + s.m_at(k + 1))) > 1e-3;
    if (!valid) continue;
    const double err = identity_error(s, a, b);
    worst = std::max(worst, err);
    draws.push_back({{"j", s.j()}, {"alpha0", a}, {"beta0", b}, {"error", err}});
    ++i;
  }
  out.results["random_draws"] = draws;
  if (c.integer("draws") > 0) {
    out.comparisons.push_back(Comparison::make("random_commutator_identity", worst, 0.0, id_tol, Mode::at_most));
  }
}

// ---------------------------------------------------------------------------
// CSV

std::string number_text(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, p) : "nan";
}

std::string value_text(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, double>) return number_text(x);
        else return x;
      },
      v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

void flatten_scalars(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const json& v = it.value();
    if (v.is_object()) flatten_scalars(v, key, out);
    else if (v.is_number_float()) out.emplace_back(key, number_text(v.get<double>()));
    else if (v.is_number_integer()) out.emplace_back(key, std::to_string(v.get<long long>()));
    else if (v.is_boolean()) out.emplace_back(key, v.get<bool>() ? "true" : "false");
  }
}

std::string trend_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return "single";
  bool dec = true, inc = true;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    dec = dec && xs[i] < xs[i - 1];
    inc = inc && xs[i] > xs[i - 1];
  }
  return dec ? "decreasing" : inc ? "increasing" : "mixed";
}

}  // namespace

// ---------------------------------------------------------------------------

double ExperimentConfig::real(const std::string& key) const {
  const auto& v = values.at(key);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return static_cast<double>(std::get<long long>(v));
}
long long ExperimentConfig::integer(const std::string& key) const { return std::get<long long>(values.at(key)); }
bool ExperimentConfig::flag(const std::string& key) const { return std::get<bool>(values.at(key)); }
const std::string& ExperimentConfig::text(const std::string& key) const {
  return std::get<std::string>(values.at(key));
}

json ExperimentConfig::to_json() const {
  json j = json::object();
  j["experiment"] = experiment;
  for (const auto& [k, v] : values) j[k] = value_json(v);
  return j;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"berry",  "detect",       "holonomy", "transfer",
                                              "stokes", "perturbation", "sweep"};
  return names;
}

std::vector<KeySpec> schema(const std::string& experiment, const std::string& base) {
  if (experiment != "sweep") return base_schema(experiment);
  std::vector<KeySpec> specs{text("base", base, "experiment evaluated at each point"),
                             text("axis1", "", "first swept key"),
                             text("values1", "", "a,b,c or start:stop:count"),
                             text("axis2", "", "second swept key (optional)"),
                             text("values2", "", "a,b,c or start:stop:count")};
  for (auto& s : base_schema(base)) specs.push_back(std::move(s));
  return specs;
}

ExperimentConfig make_config(const std::string& experiment, const json& file, const Overrides& overrides) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
  }
  if (!file.is_object()) throw ConfigError("config", "config file must hold a JSON object");
  const std::string base = experiment == "sweep" ? sweep_base(file, overrides) : "";
  const auto specs = schema(experiment, base.empty() ? "berry" : base);

  ExperimentConfig c;
  c.experiment = experiment;
  for (const auto& s : specs) c.values[s.name] = s.fallback;
  for (auto it = file.begin(); it != file.end(); ++it) {
    if (it.key() == "experiment") {
      if (it.value() != experiment) {
        throw ConfigError("experiment", "config file is for '" + it.value().dump() + "', not '" + experiment + "'");
      }
      continue;
    }
    const KeySpec* s = find_spec(specs, it.key());
    if (!s) throw ConfigError(it.key(), "unknown key '" + it.key() + "' for experiment '" + experiment + "'");
    c.values[s->name] = from_json(*s, it.value());
  }
  for (const auto& [k, v] : overrides) {
    const KeySpec* s = find_spec(specs, k);
    if (!s) throw ConfigError(k, "unknown key '" + k + "' for experiment '" + experiment + "'");
    c.values[s->name] = from_string(*s, v);
  }
  validate(c);
  if (experiment == "sweep") {
    // Axes must name base keys and hold at least one value.
    const auto base_specs = base_schema(base);
    for (const char* a : {"1", "2"}) {
      const std::string axis = c.text(std::string("axis") + a);
      const std::string vals = c.text(std::string("values") + a);
      if (axis.empty()) {
        if (!vals.empty()) throw ConfigError(std::string("values") + a, "values given without an axis");
        continue;
      }
      const KeySpec* s = find_spec(base_specs, axis);
      if (!s) throw ConfigError(std::string("axis") + a, "axis '" + axis + "' is not a key of '" + base + "'");
      parse_axis(*s, vals);
    }
    if (c.text("axis1") == c.text("axis2")) throw ConfigError("axis2", "axis2 must differ from axis1");
    ExperimentConfig probe;
    probe.experiment = base;
    for (const auto& s : base_specs) probe.values[s.name] = c.values.at(s.name);
    validate(probe);
  }
  return c;
}

ExperimentConfig config_from_echo(const json& echo) {
  if (!echo.is_object() || !echo.contains("experiment") || !echo["experiment"].is_string()) {
    throw ConfigError("experiment", "config echo lacks an experiment name");
  }
  return make_config(echo["experiment"].get<std::string>(), echo, {});
}

Comparison Comparison::make(std::string name, double value, double reference, double tolerance, Mode mode) {
  Comparison c;
  c.name = std::move(name);
  c.value = value;
  c.reference = reference;
  c.tolerance = tolerance;
  c.mode = mode;
  c.abs_error = mode == Mode::circular ? phase_distance(value, reference) : std::abs(value - reference);
  c.rel_error = reference != 0.0 ? c.abs_error / std::abs(reference) : c.abs_error;
  switch (mode) {
    case Mode::match:
    case Mode::circular:
      c.pass = c.abs_error <= tolerance;
      break;
    case Mode::at_most:
      c.pass = value <= reference + tolerance;
      break;
    case Mode::at_least:
      c.pass = value >= reference - tolerance;
      break;
  }
  if (!std::isfinite(value)) c.pass = false;
  return c;
}

json Comparison::to_json() const {
  static const char* names[] = {"match", "circular", "at_most", "at_least"};
  return {{"name", name},
          {"value", value},
          {"reference", reference},
          {"abs_error", abs_error},
          {"rel_error", rel_error},
          {"tolerance", tolerance},
          {"mode", names[static_cast<int>(mode)]},
          {"pass", pass}};
}

bool ResultRecord::passed() const {
  return std::all_of(comparisons.begin(), comparisons.end(), [](const Comparison& c) { return c.pass; });
}

json ResultRecord::to_json() const {
  json comps = json::array();
  for (const auto& c : comparisons) comps.push_back(c.to_json());
  json j = {{"schema_version", kSchemaVersion},
            {"library_version", kLibraryVersion},
            {"experiment", config.experiment},
            {"config", config.to_json()},
            {"status", passed() ? "pass" : "fail"},
            {"results", results},
            {"comparisons", comps},
            {"warnings", warnings},
            {"wall_time_s", wall_time_s}};
  require_finite_json(j, "record");
  return j;
}

ResultRecord run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ResultRecord out;
  out.config = config;
  const auto& e = config.experiment;
  if (e == "berry") run_berry(config, out);
  else if (e == "detect") run_detect(config, out);
  else if (e == "holonomy") run_holonomy(config, out);
  else if (e == "transfer") run_transfer(config, out);
  else if (e == "stokes") run_stokes(config, out);
  else if (e == "perturbation") run_perturbation(config, out);
  else throw ConfigError("experiment", "'" + e + "' cannot be run as a single point");
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<Value> parse_axis(const KeySpec& spec, const std::string& text) {
  const std::string key = spec.name;
  std::vector<Value> out;
  if (text.find(':') != std::string::npos) {
    if (spec.kind != Kind::real) throw ConfigError(key, "start:stop:count ranges need a real-valued axis");
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError(key, "range must read start:stop:count");
    const double a = std::get<double>(from_string(spec, parts[0]));
    const double b = std::get<double>(from_string(spec, parts[1]));
    long long n = 0;
    const auto [p, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), n);
    if (ec != std::errc() || p != parts[2].data() + parts[2].size() || n < 1) {
      throw ConfigError(key, "range count must be a positive integer");
    }
    for (long long i = 0; i < n; ++i) out.emplace_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1));
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
      if (!p.empty()) out.push_back(from_string(spec, p));
    }
  }
  if (out.empty()) throw ConfigError(key, "sweep range for '" + key + "' is empty");
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HOLOBEC_WORKERS")) {
    int n = 0;
    const std::string s(env);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc() && p == s.data() + s.size() && n > 0) return n;
    throw ConfigError("HOLOBEC_WORKERS", "HOLOBEC_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepOutput sweep(const ExperimentConfig& config, int workers) {
  if (config.experiment != "sweep") throw ConfigError("experiment", "sweep needs a sweep config");
  const std::string base = config.text("base");
  const auto specs = base_schema(base);
  std::vector<std::string> axes{config.text("axis1")};
  if (!config.text("axis2").empty()) axes.push_back(config.text("axis2"));
  std::vector<std::vector<Value>> values;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    values.push_back(parse_axis(*find_spec(specs, axes[a]), config.text("values" + std::to_string(a + 1))));
  }
  const std::size_t n1 = values[0].size();
  const std::size_t n2 = axes.size() > 1 ? values[1].size() : 1;
  const std::size_t total = n1 * n2;

  struct Row {
    std::vector<Value> point;
    std::optional<ResultRecord> record;
    std::string error;
  };
  std::vector<Row> rows(total);
  for (std::size_t i = 0; i < total; ++i) {
    rows[i].point.push_back(values[0][i / n2]);
    if (axes.size() > 1) rows[i].point.push_back(values[1][i % n2]);
  }

  auto evaluate = [&](std::size_t i) {
    try {
      json point = json::object();
      for (const auto& s : specs) point[s.name] = value_json(config.values.at(s.name));
      for (std::size_t a = 0; a < axes.size(); ++a) point[axes[a]] = value_json(rows[i].point[a]);
      rows[i].record = run(make_config(base, point));
    } catch (const std::exception& ex) {
      rows[i].error = ex.what();
    }
  };
  std::atomic<std::size_t> next{0};
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next++; i < total; i = next++) evaluate(i);
    });
  }
  for (auto& t : pool) t.join();

  // Column union in order of first appearance.
  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> cells(total);
  auto add = [&](std::size_t i, const std::string& k, const std::string& v) {
    if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
    cells[i][k] = v;
  };
  SweepOutput out;
  for (std::size_t i = 0; i < total; ++i) {
    add(i, "index", std::to_string(i));
    for (std::size_t a = 0; a < axes.size(); ++a) add(i, axes[a], value_text(rows[i].point[a]));
    if (!rows[i].record) {
      add(i, "status", "error");
      add(i, "error", rows[i].error);
      out.any_error = true;
      out.all_passed = false;
      continue;
    }
    const auto& rec = *rows[i].record;
    add(i, "status", rec.passed() ? "pass" : "fail");
    add(i, "error", "");
    out.all_passed = out.all_passed && rec.passed();
    for (const auto& c : rec.comparisons) {
      add(i, c.name, number_text(c.value));
      add(i, c.name + ".reference", number_text(c.reference));
      add(i, c.name + ".abs_error", number_text(c.abs_error));
      add(i, c.name + ".tolerance", number_text(c.tolerance));
      add(i, c.name + ".pass", c.pass ? "true" : "false");
    }
    std::vector<std::pair<std::string, std::string>> scalars;
    flatten_scalars(rec.results, "", scalars);
    for (const auto& [k, v] : scalars) add(i, "results." + k, v);
  }

  std::ostringstream csv;
  for (std::size_t k = 0; k < columns.size(); ++k) csv << (k ? "," : "") << csv_field(columns[k]);
  csv << "\r\n";
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const auto it = cells[i].find(columns[k]);
      csv << (k ? "," : "") << csv_field(it == cells[i].end() ? "" : it->second);
    }
    csv << "\r\n";
  }
  out.csv = csv.str();
  out.rows = total;

  // Trend of each comparison's error along axis1, one series per axis2 value.
  json trends = json::object();
  for (std::size_t col = 0; col < n2; ++col) {
    std::map<std::string, std::vector<double>> series;
    bool complete = true;
    for (std::size_t r = 0; r < n1; ++r) {
      const auto& row = rows[r * n2 + col];
      if (!row.record) {
        complete = false;
        break;
      }
      for (const auto& c : row.record->comparisons) series[c.name].push_back(c.abs_error);
    }
    if (!complete) continue;
    const std::string label = axes.size() > 1 ? axes[1] + "=" + value_text(values[1][col]) : "all";
    for (const auto& [name, xs] : series) {
      if (xs.size() == n1) trends[label][name] = trend_of(xs);
    }
  }
  std::size_t passed = 0;
  for (const auto& r : rows) passed += r.record && r.record->passed();
  out.summary = {{"schema_version", kSchemaVersion},
                 {"library_version", kLibraryVersion},
                 {"experiment", "sweep"},
                 {"config", config.to_json()},
                 {"rows", total},
                 {"passed_rows", passed},
                 {"status", out.any_error ? "error" : out.all_passed ? "pass" : "fail"},
                 {"abs_error_trend_along_" + axes[0], trends}};
  return out;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"holobec: geometric phases and holonomies of a two-mode condensate"};
  std::string experiment, config_path, out_path;
  int workers = 0;
  bool show_config = false;
  app.add_option("experiment", experiment, "berry | detect | holonomy | transfer | stokes | perturbation | sweep")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_path, "output file (JSON record, or CSV for sweeps)");
  app.add_option("--workers", workers, "sweep worker threads");
  app.add_flag("--show-config", show_config, "print the canonical config and exit");
  app.allow_extras();
  app.footer("Any other --key value pair sets an experiment key; flags override the config file.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  ExperimentConfig config;
  try {
    Overrides overrides;
    const auto extras = app.remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const std::string& a = extras[i];
      if (a.rfind("--", 0) != 0 || a.size() < 3) throw ConfigError(a, "unexpected argument '" + a + "'");
      const auto eq = a.find('=');
      if (eq != std::string::npos) {
        overrides.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
      } else {
        if (i + 1 >= extras.size()) throw ConfigError(a.substr(2), "key '" + a.substr(2) + "' needs a value");
        overrides.emplace_back(a.substr(2), extras[++i]);
      }
    }
    json file = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("config", "cannot read config file '" + config_path + "'");
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("config file is not valid JSON: ") + e.what());
      }
    }
    config = make_config(experiment, file, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "holobec: config error [" << e.key() << "]: " << e.what() << "\n";
    return 1;
  }

  if (show_config) {
    std::cout << config.canonical() << "\n";
    return 0;
  }

  auto emit = [&](const std::string& text) {
    if (out_path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + out_path + "'");
    f << text;
  };

  try {
    if (experiment == "sweep") {
      const auto result = sweep(config, resolve_workers(workers));
      emit(result.csv);
      (out_path.empty() ? std::cerr : std::cout) << result.summary.dump(2) << "\n";
      return result.any_error ? 1 : result.all_passed ? 0 : 2;
    }
    const auto record = run(config);
    emit(record.to_json().dump(2) + "\n");
    if (!record.passed()) {
      for (const auto& c : record.comparisons) {
        if (!c.pass) {
          std::cerr << "holobec: tolerance failure: " << c.name << " = " << c.value << ", reference " << c.reference
                    << ", tolerance " << c.tolerance << "\n";
        }
      }
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    json err = {{"schema_version", kSchemaVersion},
                {"library_version", kLibraryVersion},
                {"experiment", experiment},
                {"config", config.to_json()},
                {"status", "error"},
                {"error", e.what()}};
    std::cerr << "holobec: error: " << e.what() << "\n";
    try {
      emit(err.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    return 1;
  }
}

}  // namespace holobec::cli
