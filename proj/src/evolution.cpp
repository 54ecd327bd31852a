#include "holobec/evolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "holobec/errors.hpp"
#include "linalg.hpp"

namespace holobec {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(const ReducedParams& r) {
  if (!std::isfinite(r.alpha) || !std::isfinite(r.beta) || !std::isfinite(r.gamma) || !std::isfinite(r.phi)) {
    throw std::domain_error("schedule produced a non-finite Hamiltonian parameter");
  }
}

void require_finite(const ControlPoint& c) {
  if (!std::isfinite(c.phi) || !std::isfinite(c.theta)) {
    throw std::domain_error("schedule produced a non-finite control point");
  }
}

// Tridiagonal stepper. The real spectrum depends only on the diagonal and the
// subdiagonal magnitudes, so a change of phi alone reuses it.
// e^{i x} with its modulus pulled to 1 by one Newton step; the same factor
// is applied at every step, so a biased modulus would compound.
cplx unit_phase(double x) {
  const cplx z(std::cos(x), std::sin(x));
  return z * (1.5 - 0.5 * std::norm(z));
}

class ReducedStepper {
 public:
  explicit ReducedStepper(const SpinSystem& sys) : sys_(sys), n_(sys.dim()) {
    ladders_.resize(std::max(n_ - 1, 0));
    for (int k = 0; k + 1 < n_; ++k) ladders_(k) = ladder(sys.j(), sys.m_at(k));
  }

  // Advances psi by exp(-i H dt) and returns <psi|H|psi>.
  double step(const ReducedParams& r, double dt, Vector& psi) {
    require_finite(r);
    Eigen::VectorXd diag(n_);
    for (int k = 0; k < n_; ++k) {
      const double m = sys_.m_at(k);
      diag(k) = r.alpha * m + r.beta * m * m;
    }
    Eigen::VectorXd mags = (0.5 * std::abs(r.gamma)) * ladders_;
    if (!have_spectrum_ || diag != cached_diag_ || mags != cached_mags_) {
      Vector sub = mags.cast<cplx>();
      spectrum_ = detail::tridiagonal_spectrum(diag, sub);
      // The step is reused up to ~1e6 times, so eigenvector non-orthogonality
      // would accumulate into norm drift. Two Newton-Schulz sweeps fix it.
      using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
      MatrixL v = spectrum_.vectors.cast<long double>();
      for (int sweep = 0; sweep < 2; ++sweep) {
        const MatrixL gram = v.transpose() * v;
        v = v * (1.5L * MatrixL::Identity(n_, n_) - 0.5L * gram);
      }
      spectrum_.vectors = v.cast<double>();
      cached_diag_ = diag;
      cached_mags_ = mags;
      have_spectrum_ = true;
    }
    // Subdiagonal phase: sign(gamma) e^{-i phi}, identical on every link.
    // Each power is evaluated directly; a running product would let its
    // modulus drift.
    const double flip = r.gamma < 0.0 ? kPi : 0.0;
    int power = 0;
    for (int k = 0; k < n_; ++k) {
      spectrum_.gauge(k) = unit_phase(power * (flip - r.phi));
      if (k + 1 < n_ && mags(k) > 0.0) ++power;
    }
    const Vector w = spectrum_.gauge.conjugate().cwiseProduct(psi);
    Vector c = spectrum_.vectors.transpose().cast<cplx>() * w;
    double energy = 0.0;
    for (int k = 0; k < n_; ++k) {
      energy += spectrum_.values(k) * std::norm(c(k));
      c(k) *= unit_phase(-dt * spectrum_.values(k));
    }
    energy /= c.squaredNorm();
    psi = spectrum_.gauge.cwiseProduct(spectrum_.vectors.cast<cplx>() * c);
    return energy;
  }

 private:
  SpinSystem sys_;
  int n_;
  Eigen::VectorXd ladders_;
  bool have_spectrum_ = false;
  Eigen::VectorXd cached_diag_;
  Eigen::VectorXd cached_mags_;
  detail::TridiagonalSpectrum spectrum_;
};

// psi -> U exp(-i H0 dt) U^dag psi.
class RotatedStepper {
 public:
  RotatedStepper(const SpinSystem& sys, double alpha0, double beta0)
      : rotor_(sys), energies_(h0_energies(sys, alpha0, beta0)) {}

  double step(const ControlPoint& c, double dt, Vector& psi) const {
    require_finite(c);
    Vector local = rotor_.apply_adjoint(c.phi, c.theta, psi);
    double energy = 0.0;
    for (Eigen::Index k = 0; k < local.size(); ++k) {
      energy += energies_(k) * std::norm(local(k));
      local(k) *= unit_phase(-dt * energies_(k));
    }
    energy /= local.squaredNorm();
    psi = rotor_.apply(c.phi, c.theta, local);
    return energy;
  }

 private:
  Rotor rotor_;
  Eigen::VectorXd energies_;
};

QuantumState rotated_basis(const Rotor& rotor, double phi, double theta, const SpinSystem& sys, double m) {
  return QuantumState::normalized(rotor.apply(phi, theta, QuantumState::basis(sys, m).amplitudes()));
}

}  // namespace

double profile_value(Profile p, double x) {
  x = std::clamp(x, 0.0, 1.0);
  switch (p) {
    case Profile::linear:
      return x;
    case Profile::smooth:
      return x - std::sin(2.0 * kPi * x) / (2.0 * kPi);
  }
  return x;
}

const char* to_string(Profile p) {
  switch (p) {
    case Profile::linear:
      return "linear";
    case Profile::smooth:
      return "smooth";
  }
  return "unknown";
}

const char* to_string(RampMode r) {
  switch (r) {
    case RampMode::instantaneous:
      return "instantaneous";
    case RampMode::adiabatic:
      return "adiabatic";
  }
  return "unknown";
}

Schedule::Schedule(double duration, int steps, Controls controls)
    : duration_(duration), steps_(steps), controls_(std::move(controls)) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("schedule duration must be > 0");
  if (steps < 100) throw std::invalid_argument("schedule needs at least 100 steps");
  const bool callable =
      std::visit([](const auto& c) { return static_cast<bool>(c.at); }, controls_);
  if (!callable) throw std::invalid_argument("schedule controls are empty");
}

Operator Schedule::hamiltonian_at(const SpinSystem& sys, double t) const {
  if (const auto* r = std::get_if<ReducedControl>(&controls_)) return build_hamiltonian(sys, r->at(t));
  const auto& rc = std::get<RotatedControl>(controls_);
  const ControlPoint c = rc.at(t);
  return conjugated_hamiltonian(sys, rc.alpha0, rc.beta0, c.phi, c.theta);
}

Schedule berry_loop_schedule(double alpha0, double theta, double duration, int steps, Profile profile) {
  const double a = alpha0 * std::cos(theta);
  const double g = alpha0 * std::sin(theta);
  ReducedControl control{[=](double t) {
    return ReducedParams{a, 0.0, g, 2.0 * kPi * profile_value(profile, t / duration)};
  }};
  return Schedule(duration, steps, std::move(control));
}

Schedule waypoint_schedule(double alpha0, double beta0, std::vector<ControlPoint> waypoints, std::vector<double> weights,
                           double duration, int steps, Profile profile) {
  if (waypoints.size() < 2) throw std::invalid_argument("waypoint schedule needs at least two points");
  if (weights.size() != waypoints.size() - 1) throw std::invalid_argument("one weight per leg required");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("leg weights must be positive");
  }
  std::vector<double> edges(weights.size() + 1, 0.0);
  std::partial_sum(weights.begin(), weights.end(), edges.begin() + 1);
  for (double& e : edges) e /= edges.back();

  RotatedControl control{alpha0, beta0, [=](double t) {
                           const double x = std::clamp(t / duration, 0.0, 1.0);
                           std::size_t leg = std::upper_bound(edges.begin(), edges.end(), x) - edges.begin();
                           leg = std::clamp<std::size_t>(leg, 1, weights.size()) - 1;
                           const double local = (x - edges[leg]) / (edges[leg + 1] - edges[leg]);
                           const double s = profile_value(profile, local);
                           const ControlPoint& a = waypoints[leg];
                           const ControlPoint& b = waypoints[leg + 1];
                           return ControlPoint{a.phi + s * (b.phi - a.phi), a.theta + s * (b.theta - a.theta)};
                         }};
  return Schedule(duration, steps, std::move(control));
}

Schedule rectangle_schedule(double alpha0, double beta0, const Rectangle& r, double duration, int steps,
                            Profile profile) {
  std::vector<ControlPoint> corners{{r.phi0, r.theta0}, {r.phi1, r.theta0}, {r.phi1, r.theta1}, {r.phi0, r.theta1},
                                    {r.phi0, r.theta0}};
  return waypoint_schedule(alpha0, beta0, std::move(corners), {1.0, 1.0, 1.0, 1.0}, duration, steps, profile);
}

Trajectory propagate(const SpinSystem& sys, const Schedule& schedule, const QuantumState& psi0,
                     const PropagateOptions& options) {
  if (psi0.dim() != sys.dim()) throw std::invalid_argument("initial state dimension does not match the spin system");
  if (options.sample_stride < 0) throw std::invalid_argument("sample_stride must be >= 0");

  Trajectory out;
  out.dt = schedule.dt();
  out.steps = schedule.steps();
  out.initial = psi0.amplitudes();
  out.step_energies.reserve(out.steps);

  Vector psi = out.initial;
  out.sample_times.push_back(0.0);
  out.samples.push_back(psi);

  const double dt = out.dt;
  auto run = [&](auto&& step) {
    for (int k = 0; k < out.steps; ++k) {
      const double t_mid = (k + 0.5) * dt;
      out.step_energies.push_back(step(t_mid, psi));
      out.max_norm_error = std::max(out.max_norm_error, std::abs(psi.squaredNorm() - 1.0));
      const int done = k + 1;
      if (options.sample_stride > 0 && done % options.sample_stride == 0 && done != out.steps) {
        out.sample_times.push_back(done * dt);
        out.samples.push_back(psi);
      }
    }
  };

  if (const auto* r = std::get_if<ReducedControl>(&schedule.controls())) {
    ReducedStepper stepper(sys);
    run([&](double t, Vector& v) { return stepper.step(r->at(t), dt, v); });
  } else {
    const auto& rc = std::get<RotatedControl>(schedule.controls());
    const RotatedStepper stepper(sys, rc.alpha0, rc.beta0);
    run([&](double t, Vector& v) { return stepper.step(rc.at(t), dt, v); });
  }

  out.sample_times.push_back(schedule.duration());
  out.samples.push_back(psi);
  out.final_state = std::move(psi);
  return out;
}

PhaseDecomposition extract_phases(const Trajectory& trajectory, const Schedule& schedule, double min_overlap) {
  if (trajectory.steps != schedule.steps() || static_cast<int>(trajectory.step_energies.size()) != trajectory.steps) {
    throw std::invalid_argument("trajectory does not belong to this schedule");
  }
  const cplx ov = trajectory.initial.dot(trajectory.final_state);
  PhaseDecomposition out;
  out.overlap = std::abs(ov);
  if (!(out.overlap > min_overlap)) {
    std::ostringstream msg;
    msg << "evolution is not cyclic: |<psi(0)|psi(T)>| = " << out.overlap;
    throw NonCyclicEvolution(msg.str(), out.overlap);
  }
  // Each step conserves its own energy exactly, so the midpoint sum is the
  // exact integral of <H> for the discrete propagator.
  double integral = 0.0;
  for (double e : trajectory.step_energies) integral += e;
  integral *= trajectory.dt;
  out.total = std::arg(ov);
  out.dynamical = -integral;
  out.geometric = wrap_phase(out.total - out.dynamical);
  return out;
}

BerryRun adiabatic_berry_phase(const SpinSystem& sys, const BerryRunSettings& s) {
  if (!sys.contains(s.m)) throw std::out_of_range("m is not a level of this spin");
  const Rotor rotor(sys);
  const QuantumState psi0 = rotated_basis(rotor, 0.0, s.theta, sys, s.m);
  const Schedule schedule =
      s.beta0 == 0.0 ? berry_loop_schedule(s.alpha0, s.theta, s.duration, s.steps, s.profile)
                     : waypoint_schedule(s.alpha0, s.beta0, {{0.0, s.theta}, {2.0 * kPi, s.theta}}, {1.0}, s.duration,
                                         s.steps, s.profile);
  const Trajectory traj = propagate(sys, schedule, psi0);
  return BerryRun{extract_phases(traj, schedule), traj.max_norm_error};
}

ConvergenceStudy converge_in_duration(const std::function<double(double)>& value, double initial_duration, double tol,
                                      int max_doublings, bool circular) {
  if (!(initial_duration > 0.0)) throw std::invalid_argument("initial duration must be > 0");
  if (max_doublings < 1) throw std::invalid_argument("max_doublings must be >= 1");
  ConvergenceStudy out;
  double t = initial_duration;
  out.durations.push_back(t);
  out.values.push_back(value(t));
  for (int i = 0; i < max_doublings; ++i) {
    t *= 2.0;
    const double v = value(t);
    const double change = circular ? phase_distance(v, out.values.back()) : std::abs(v - out.values.back());
    out.durations.push_back(t);
    out.values.push_back(v);
    out.changes.push_back(change);
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double snap_duration(double alpha0, double t) {
  if (alpha0 == 0.0 || !std::isfinite(alpha0)) throw std::invalid_argument("alpha0 must be finite and nonzero");
  const double period = 2.0 * kPi / std::abs(alpha0);
  return std::max(1.0, std::ceil(t / period - 1e-12)) * period;
}

std::vector<double> detection_prediction(const SpinSystem& sys, double theta) {
  const Rotor rotor(sys);
  Vector psi = rotor.apply(0.0, kPi / 2.0, QuantumState::basis(sys, sys.j()).amplitudes());
  for (int k = 0; k < sys.dim(); ++k) {
    psi(k) *= std::exp(cplx(0.0, berry_phase_closed(sys.m_at(k), theta).raw));
  }
  psi = rotor.apply_adjoint(0.0, kPi / 2.0, psi);
  std::vector<double> pops(sys.dim());
  for (int k = 0; k < sys.dim(); ++k) pops[k] = std::norm(psi(k));
  return pops;
}

DetectionReport detection_protocol(const SpinSystem& sys, const DetectionSettings& s) {
  if (!std::isfinite(s.theta)) throw std::invalid_argument("theta must be finite");
  const Rotor rotor(sys);
  DetectionReport out;
  out.ramp = s.ramp;
  out.total_atoms = sys.two_j();

  const double residual = phase_distance(s.alpha0 * s.duration, 0.0);
  out.dynamical_residual = residual;
  if (residual > s.phase_tolerance) {
    std::ostringstream msg;
    msg << "alpha0 * T = " << s.alpha0 * s.duration << " is " << residual
        << " rad from a multiple of 2 pi; dynamical phases will not cancel (nearest valid T = "
        << snap_duration(s.alpha0, s.duration) << ")";
    out.warning = msg.str();
  }

  Vector psi = rotor.apply(0.0, kPi / 2.0, QuantumState::basis(sys, sys.j()).amplitudes());
  if (s.ramp == RampMode::instantaneous) {
    psi = rotor.apply(0.0, s.theta, psi);
    const Schedule schedule =
        waypoint_schedule(s.alpha0, 0.0, {{0.0, s.theta}, {2.0 * kPi, s.theta}}, {1.0}, s.duration, s.steps, s.profile);
    const Trajectory traj = propagate(sys, schedule, QuantumState::normalized(psi));
    out.max_norm_error = traj.max_norm_error;
    psi = rotor.apply_adjoint(0.0, s.theta, traj.final_state);
  } else {
    const Schedule schedule = waypoint_schedule(
        s.alpha0, 0.0, {{0.0, 0.0}, {0.0, s.theta}, {2.0 * kPi, s.theta}, {2.0 * kPi, 0.0}}, {1.0, 2.0, 1.0},
        s.duration, s.steps, s.profile);
    const Trajectory traj = propagate(sys, schedule, QuantumState::normalized(psi));
    out.max_norm_error = traj.max_norm_error;
    psi = traj.final_state;
  }
  psi = rotor.apply_adjoint(0.0, kPi / 2.0, psi);

  out.populations.resize(sys.dim());
  out.fock_labels.reserve(sys.dim());
  for (int k = 0; k < sys.dim(); ++k) {
    const double m = sys.m_at(k);
    out.populations[k] = std::norm(psi(k));
    out.fock_labels.push_back(fock_map(sys, m));
    out.mode_b_population += out.populations[k] * out.fock_labels.back().n_b;
  }
  out.overlap_jj = out.populations.back();
  return out;
}

AdiabaticHolonomyResult adiabatic_holonomy(const SpinSystem& sys, const AdiabaticHolonomySettings& s) {
  if (!sys.contains(s.m) || !sys.contains(s.m + 1.0)) throw std::out_of_range("pair {m, m+1} is not inside the spin");
  if (s.beta0 == 0.0 || !std::isfinite(s.beta0)) throw std::invalid_argument("beta0 must be finite and nonzero");
  const double ratio = degeneracy_ratio(s.m);
  const double alpha0 = s.alpha0.value_or(ratio * s.beta0);
  if (std::abs(alpha0 / s.beta0 - ratio) > 1e-12) {
    std::ostringstream msg;
    msg << "degeneracy violated: alpha0/beta0 = " << alpha0 / s.beta0 << ", need " << ratio;
    throw std::invalid_argument(msg.str());
  }

  const Schedule schedule = rectangle_schedule(alpha0, s.beta0, s.rect, s.duration, s.steps, s.profile);
  const Rotor rotor(sys);
  const std::array<double, 2> ms{s.m, s.m + 1.0};
  std::array<Vector, 2> frame;
  for (int i = 0; i < 2; ++i) frame[i] = rotated_basis(rotor, s.rect.phi0, s.rect.theta0, sys, ms[i]).amplitudes();

  auto follow = [&](int k) { return propagate(sys, schedule, QuantumState(frame[k], 1e-9)); };
  auto second = std::async(std::launch::async, follow, 1);
  const Trajectory t0 = follow(0);
  const Trajectory t1 = second.get();

  AdiabaticHolonomyResult out;
  out.energy = alpha0 * s.m + s.beta0 * s.m * s.m;
  const cplx strip = std::exp(cplx(0.0, out.energy * s.duration));
  Matrix u(2, 2);
  const std::array<const Trajectory*, 2> trajs{&t0, &t1};
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) u(i, k) = strip * frame[i].dot(trajs[k]->final_state);
    out.leakage.push_back(std::max(0.0, 1.0 - u.col(k).squaredNorm()));
    out.max_norm_error = std::max(out.max_norm_error, trajs[k]->max_norm_error);
  }
  out.max_leakage = *std::max_element(out.leakage.begin(), out.leakage.end());
  out.unitarity_error = (u.adjoint() * u - Matrix::Identity(2, 2)).norm();
  out.holonomy = Holonomy{std::move(u), HolonomyMethod::adiabatic};
  if (out.max_leakage > s.leakage_threshold) {
    std::ostringstream msg;
    msg << "population left the degenerate pair: leakage " << out.max_leakage << " > " << s.leakage_threshold;
    throw SubspaceLeakage(msg.str(), out.max_leakage);
  }
  return out;
}

}  // namespace holobec
