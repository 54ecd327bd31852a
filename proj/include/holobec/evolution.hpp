#pragma once

// Time-dependent Schrodinger propagation with the piecewise-constant midpoint
// rule psi_{k+1} = exp(-i H(t_k + dt/2) dt) psi_k, geometric-phase extraction,
// and the two adiabatic experiments built on it (the interferometric Berry
// phase readout and the degenerate-pair holonomy).
//
// Sign convention: a stationary state gains exp(-i E t). The dynamical phase
// is -int <H> dt and geometric = total - dynamical.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "holobec/geometry.hpp"
#include "holobec/hamiltonian.hpp"
#include "holobec/spin.hpp"

namespace holobec {

/// Time profile s(x) on [0, 1] used to traverse each leg of a control path.
enum class Profile {
  linear,  // s = x
  smooth,  // s = x - sin(2 pi x)/(2 pi), zero velocity at both ends
};

double profile_value(Profile p, double x);
const char* to_string(Profile p);

/// H(t) = alpha Jz + beta Jz^2 + gamma (cos phi Jx + sin phi Jy), tridiagonal.
struct ReducedControl {
  std::function<ReducedParams(double t)> at;
};

/// H(t) = U(phi, theta) (alpha0 Jz + beta0 Jz^2) U^dag(phi, theta).
struct RotatedControl {
  double alpha0 = 1.0;
  double beta0 = 0.0;
  std::function<ControlPoint(double t)> at;
};

class Schedule {
 public:
  using Controls = std::variant<ReducedControl, RotatedControl>;

  /// Throws std::invalid_argument if duration <= 0 or steps < 100.
  Schedule(double duration, int steps, Controls controls);

  double duration() const noexcept { return duration_; }
  int steps() const noexcept { return steps_; }
  double dt() const noexcept { return duration_ / steps_; }
  const Controls& controls() const noexcept { return controls_; }

  /// Dense H(t), for inspection and tests.
  Operator hamiltonian_at(const SpinSystem& sys, double t) const;

 private:
  double duration_;
  int steps_;
  Controls controls_;
};

/// phi: 0 -> 2 pi at fixed theta with alpha = alpha0 cos(theta),
/// gamma = alpha0 sin(theta), beta = 0 (tridiagonal route).
Schedule berry_loop_schedule(double alpha0, double theta, double duration, int steps, Profile profile = Profile::smooth);

/// Piecewise-linear path through waypoints under the rotated Hamiltonian.
/// Leg i takes a share weights[i] / sum(weights) of the duration.
Schedule waypoint_schedule(double alpha0, double beta0, std::vector<ControlPoint> waypoints, std::vector<double> weights,
                           double duration, int steps, Profile profile = Profile::smooth);

/// Rectangle sides in order, equal time each.
Schedule rectangle_schedule(double alpha0, double beta0, const Rectangle& rect, double duration, int steps,
                            Profile profile = Profile::smooth);

struct Trajectory {
  double dt = 0.0;
  int steps = 0;
  Vector initial;
  Vector final_state;
  std::vector<double> sample_times;
  std::vector<Vector> samples;
  /// <psi_k|H(t_k + dt/2)|psi_k>, conserved exactly by step k.
  std::vector<double> step_energies;
  double max_norm_error = 0.0;
};

struct PropagateOptions {
  /// Keep every n-th state (0 keeps only the endpoints).
  int sample_stride = 0;
};

/// Throws std::invalid_argument on a dimension mismatch and std::domain_error
/// on non-finite Hamiltonian entries.
Trajectory propagate(const SpinSystem& sys, const Schedule& schedule, const QuantumState& psi0,
                     const PropagateOptions& options = {});

struct PhaseDecomposition {
  double total = 0.0;      // arg <psi(0)|psi(T)>, wrapped
  double dynamical = 0.0;  // -int <H> dt, unwrapped
  double geometric = 0.0;  // total - dynamical, wrapped
  double overlap = 0.0;    // |<psi(0)|psi(T)>|
};

/// Throws NonCyclicEvolution when |<psi(0)|psi(T)>| <= min_overlap.
PhaseDecomposition extract_phases(const Trajectory& trajectory, const Schedule& schedule, double min_overlap = 0.99);

/// Geometric phase of U(0, theta)|j,m> carried around phi: 0 -> 2 pi.
/// beta0 == 0 uses the tridiagonal reduced Hamiltonian; otherwise the full
/// conjugated nonlinear Hamiltonian.
struct BerryRunSettings {
  double m = 0.0;
  double theta = 0.0;
  double alpha0 = 1.0;
  double beta0 = 0.0;
  double duration = 100.0;
  int steps = 1000;
  Profile profile = Profile::smooth;
};

struct BerryRun {
  PhaseDecomposition phases;
  double max_norm_error = 0.0;
};

BerryRun adiabatic_berry_phase(const SpinSystem& sys, const BerryRunSettings& settings);

/// Doubling study: evaluates value(T0), value(2 T0), ... until successive
/// values differ by less than tol (circular distance for phases).
struct ConvergenceStudy {
  std::vector<double> durations;
  std::vector<double> values;
  std::vector<double> changes;  // changes[i] = |values[i+1] - values[i]|
  bool converged = false;
  double value() const { return values.empty() ? 0.0 : values.back(); }
  double duration() const { return durations.empty() ? 0.0 : durations.back(); }
};

ConvergenceStudy converge_in_duration(const std::function<double(double)>& value, double initial_duration,
                                      double tol = 1e-3, int max_doublings = 10, bool circular = true);

// ---------------------------------------------------------------------------
// Interferometric Berry-phase readout

enum class RampMode {
  instantaneous,  // U(0, theta) and its inverse applied as gates around the phi loop
  adiabatic,      // theta ramped in and out by the Hamiltonian itself
};

const char* to_string(RampMode r);

struct DetectionSettings {
  double theta = 0.0;
  double alpha0 = 1.0;
  double duration = 100.0;  // total time under the Hamiltonian
  int steps = 10000;
  RampMode ramp = RampMode::instantaneous;
  Profile profile = Profile::smooth;
  /// Allowed distance of alpha0 * duration from a multiple of 2 pi.
  double phase_tolerance = 1e-6;
};

struct DetectionReport {
  RampMode ramp = RampMode::instantaneous;
  std::vector<TwoModeFock> fock_labels;  // ascending m
  std::vector<double> populations;
  double overlap_jj = 0.0;       // |<j,j|psi_final>|^2
  double mode_b_population = 0.0;
  int total_atoms = 0;
  double dynamical_residual = 0.0;  // distance of alpha0 T from 2 pi Z
  std::optional<std::string> warning;
  double max_norm_error = 0.0;
};

/// Prepare |j,j>, apply U(0, pi/2), carry the state around the loop
/// U^dag(0, theta) U(2 pi, 0) U(0, theta) by time evolution, apply
/// U^dag(0, pi/2), and read out Fock populations.
DetectionReport detection_protocol(const SpinSystem& sys, const DetectionSettings& settings);

/// Ideal populations when each |j,m> gains exactly -2 pi m (1 - cos theta).
std::vector<double> detection_prediction(const SpinSystem& sys, double theta);

/// Smallest duration >= t with alpha0 * duration a multiple of 2 pi.
double snap_duration(double alpha0, double t);

// ---------------------------------------------------------------------------
// Degenerate-pair holonomy by simulation

struct AdiabaticHolonomySettings {
  double m = 0.0;
  double beta0 = 1.0;  // alpha0 follows from the degeneracy condition when unset
  std::optional<double> alpha0;
  Rectangle rect;
  double duration = 500.0;
  int steps = 10000;
  Profile profile = Profile::smooth;
  double leakage_threshold = 1e-3;
};

struct AdiabaticHolonomyResult {
  Holonomy holonomy;
  std::vector<double> leakage;  // 1 - |column|^2 per followed basis state
  double max_leakage = 0.0;
  double unitarity_error = 0.0;
  double energy = 0.0;
  double max_norm_error = 0.0;
};

/// Propagates U(rect start)|j,m> and |j,m+1> around the rectangle under
/// U H0 U^dag, strips exp(-i E T), and returns the 2x2 overlap matrix.
/// Throws std::invalid_argument when alpha0/beta0 != -(2m+1) (1e-12) and
/// SubspaceLeakage when leakage exceeds the threshold.
AdiabaticHolonomyResult adiabatic_holonomy(const SpinSystem& sys, const AdiabaticHolonomySettings& settings);

}  // namespace holobec
