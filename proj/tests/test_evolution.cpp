#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "holobec/errors.hpp"
#include "holobec/evolution.hpp"
#include "support.hpp"

using namespace holobec;
using testing_support::max_entry;

namespace {

constexpr double kPi = std::numbers::pi;

ReducedControl constant(ReducedParams r) {
  return ReducedControl{[r](double) { return r; }};
}

QuantumState rotated(const SpinSystem& sys, double phi, double theta, double m) {
  return QuantumState::normalized(rotation_u(sys, phi, theta).matrix() * QuantumState::basis(sys, m).amplitudes());
}

// Step-by-step dense reference: psi <- exp(-i H(t_mid) dt) psi.
Vector dense_reference(const SpinSystem& sys, const Schedule& s, Vector psi) {
  for (int k = 0; k < s.steps(); ++k) {
    const Operator h = s.hamiltonian_at(sys, (k + 0.5) * s.dt());
    psi = expm_series(h.matrix(), cplx(0.0, -s.dt())) * psi;
  }
  return psi;
}

}  // namespace

TEST_CASE("time profiles") {
  for (Profile p : {Profile::linear, Profile::smooth}) {
    CHECK(profile_value(p, 0.0) == 0.0);
    CHECK(profile_value(p, 1.0) == doctest::Approx(1.0));
    CHECK(profile_value(p, 0.5) == doctest::Approx(0.5));
    CHECK(profile_value(p, 0.3) < profile_value(p, 0.31));
  }
  CHECK(profile_value(Profile::smooth, 0.01) < 1e-4);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(Schedule(0.0, 1000, constant({})), std::invalid_argument);
  CHECK_THROWS_AS(Schedule(1.0, 50, constant({})), std::invalid_argument);
  CHECK_THROWS_AS(Schedule(1.0, 100, ReducedControl{}), std::invalid_argument);
  CHECK_THROWS_AS(waypoint_schedule(1, 0, {{0, 0}}, {}, 1, 100), std::invalid_argument);
  CHECK_THROWS_AS(waypoint_schedule(1, 0, {{0, 0}, {1, 1}}, {0.0}, 1, 100), std::invalid_argument);
  const auto s = waypoint_schedule(1, 0, {{0, 0}, {1, 0}, {1, 2}}, {1.0, 3.0}, 4.0, 100, Profile::linear);
  const auto& rc = std::get<RotatedControl>(s.controls());
  CHECK(rc.at(0.5).phi == doctest::Approx(0.5));
  CHECK(rc.at(1.0).phi == doctest::Approx(1.0));
  CHECK(rc.at(2.5).theta == doctest::Approx(1.0));
  CHECK(rc.at(4.0).theta == doctest::Approx(2.0));
}

TEST_CASE("stationary states gain exp(-i E t)") {
  const auto sys = SpinSystem::from_j(3);
  const ReducedParams r{0.7, 0.2, 0.45, 0.3};
  Eigen::SelfAdjointEigenSolver<Matrix> eig(build_hamiltonian(sys, r).matrix());
  const Schedule s(5.0, 200, constant(r));
  for (int k : {0, 3, 6}) {
    const QuantumState psi0(eig.eigenvectors().col(k));
    const auto traj = propagate(sys, s, psi0);
    const Vector want = std::exp(cplx(0.0, -eig.eigenvalues()(k) * 5.0)) * psi0.amplitudes();
    CHECK((traj.final_state - want).norm() < 1e-10);
    const auto phases = extract_phases(traj, s);
    CHECK(std::abs(phases.geometric) < 1e-6);
  }

  const Schedule z(2.5, 100, constant({1.3, 0, 0, 0}));
  for (double m : {-3.0, 1.0, 2.0}) {
    const auto traj = propagate(sys, z, QuantumState::basis(sys, m));
    CHECK(std::abs(traj.final_state(sys.index_of(m)) - std::exp(cplx(0.0, -1.3 * m * 2.5))) < 1e-12);
  }
}

TEST_CASE("propagate matches a dense step-by-step reference") {
  std::mt19937 rng(13);
  const auto sys = SpinSystem::from_j(2);
  const Vector psi0 = testing_support::random_state(rng, sys.dim());
  const auto reduced = berry_loop_schedule(1.5, 0.9, 6.0, 150, Profile::smooth);
  CHECK((propagate(sys, reduced, QuantumState(psi0)).final_state - dense_reference(sys, reduced, psi0)).norm() < 1e-10);

  const auto nonlinear = rectangle_schedule(1.0, 0.4, {0.0, 1.0, 0.5, 1.2}, 6.0, 160, Profile::linear);
  CHECK((propagate(sys, nonlinear, QuantumState(psi0)).final_state - dense_reference(sys, nonlinear, psi0)).norm() <
        1e-10);
}

TEST_CASE("reduced and rotated routes agree for the linear loop") {
  const auto sys = SpinSystem::from_j(4);
  const auto a = berry_loop_schedule(2.0, 0.8, 30.0, 900);
  const auto b = waypoint_schedule(2.0, 0.0, {{0.0, 0.8}, {2 * kPi, 0.8}}, {1.0}, 30.0, 900);
  for (double t : {0.0, 7.3, 30.0}) {
    CHECK(max_entry(a.hamiltonian_at(sys, t).matrix() - b.hamiltonian_at(sys, t).matrix()) < 1e-12);
  }
  const auto psi0 = rotated(sys, 0, 0.8, 1);
  CHECK((propagate(sys, a, psi0).final_state - propagate(sys, b, psi0).final_state).norm() < 1e-10);
}

TEST_CASE("propagation errors") {
  const auto sys = SpinSystem::from_j(1);
  const Schedule s(1.0, 100, constant({1, 0, 0, 0}));
  CHECK_THROWS_AS(propagate(sys, s, QuantumState::basis(SpinSystem::from_j(2), 0)), std::invalid_argument);
  const Schedule bad(1.0, 100, constant({std::nan(""), 0, 0, 0}));
  CHECK_THROWS_AS(propagate(sys, bad, QuantumState::basis(sys, 0)), std::domain_error);
  const Schedule flip(kPi, 100, constant({0, 0, 1, 0}));
  try {
    const auto traj = propagate(sys, flip, QuantumState::basis(sys, 1));
    extract_phases(traj, flip);
    FAIL("expected NonCyclicEvolution");
  } catch (const NonCyclicEvolution& e) {
    CHECK(e.overlap() < 1e-6);
  }
}

TEST_CASE("trajectory sampling and norm") {
  const auto sys = SpinSystem::from_j(6);
  const auto s = berry_loop_schedule(10.0, 1.0, 50.0, 5000);
  PropagateOptions opt;
  opt.sample_stride = 1000;
  const auto traj = propagate(sys, s, rotated(sys, 0, 1.0, 2), opt);
  CHECK(traj.samples.size() == 6);
  CHECK(traj.sample_times.back() == doctest::Approx(50.0));
  CHECK(traj.step_energies.size() == 5000);
  CHECK(traj.max_norm_error < 1e-10);
}

TEST_CASE("long runs keep the norm and show no error floor") {
  // A reused step operator that is unitary only to O(eps) drifts linearly in
  // the step count; at E ~ 2000 that drift would bias the dynamical phase.
  const auto sys = SpinSystem::from_j(10);
  std::vector<double> errors;
  for (double t : {750.0, 1500.0, 3000.0}) {
    BerryRunSettings s;
    s.m = 10;
    s.theta = kPi / 6;
    s.alpha0 = 200;
    s.duration = t;
    s.steps = static_cast<int>(100 * t);
    const auto run = adiabatic_berry_phase(sys, s);
    CHECK(run.max_norm_error < 1e-10);
    errors.push_back(phase_distance(run.phases.geometric, berry_phase_closed(10, kPi / 6).raw));
  }
  // Adiabatic error ~ 1/T throughout.
  CHECK(errors[1] / errors[0] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(errors[2] / errors[1] == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("adiabatic following and Berry phase extraction") {
  const auto sys = SpinSystem::from_j(5);
  BerryRunSettings s;
  s.m = 1;
  s.theta = kPi / 3;
  s.alpha0 = 100;
  s.duration = 400;
  s.steps = 40000;
  const auto run = adiabatic_berry_phase(sys, s);
  CHECK(run.phases.overlap > 0.999);
  CHECK(phase_distance(run.phases.geometric, -kPi) < 2e-3);
  CHECK(run.max_norm_error < 1e-10);

  s.m = 0;
  CHECK(std::abs(adiabatic_berry_phase(sys, s).phases.geometric) < 1e-3);
}

TEST_CASE("geometric phase error shrinks as the loop slows down") {
  const auto sys = SpinSystem::from_j(5);
  double previous = 1e9;
  for (double t : {50.0, 100.0, 200.0}) {
    BerryRunSettings s;
    s.m = 2;
    s.theta = kPi / 2;
    s.alpha0 = 20;
    s.duration = t;
    s.steps = static_cast<int>(100 * t);
    const double err = phase_distance(adiabatic_berry_phase(sys, s).phases.geometric, berry_phase_closed(2, kPi / 2).wrapped);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("doubling study") {
  const auto study = converge_in_duration([](double t) { return 1.0 / t; }, 1.0, 1e-3, 20, false);
  CHECK(study.converged);
  CHECK(study.changes.back() < 1e-3);
  CHECK(study.durations.size() == study.values.size());
  CHECK(study.duration() == doctest::Approx(1024.0));
  const auto stuck = converge_in_duration([](double t) { return t; }, 1.0, 1e-3, 3, false);
  CHECK_FALSE(stuck.converged);
  CHECK(stuck.values.size() == 4);
}

TEST_CASE("snap_duration") {
  CHECK(snap_duration(1.0, 10.0) == doctest::Approx(4 * kPi));
  CHECK(snap_duration(2.0, kPi) == doctest::Approx(kPi));
  CHECK(snap_duration(-2.0, 0.1) == doctest::Approx(kPi));
  CHECK_THROWS_AS(snap_duration(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("detection protocol against a dense simulation at j = 1") {
  const auto sys = SpinSystem::from_j(1);
  const double theta = kPi / 3;
  DetectionSettings d;
  d.theta = theta;
  d.alpha0 = 4.0;
  d.duration = snap_duration(4.0, 60.0);
  d.steps = 6000;
  d.ramp = RampMode::instantaneous;
  const auto rep = detection_protocol(sys, d);
  CHECK_FALSE(rep.warning.has_value());

  // Dense 3x3 reference of the same protocol.
  Vector psi = rotation_u(sys, 0, kPi / 2).matrix() * QuantumState::basis(sys, 1).amplitudes();
  psi = rotation_u(sys, 0, theta).matrix() * psi;
  const auto loop = waypoint_schedule(4.0, 0.0, {{0, theta}, {2 * kPi, theta}}, {1.0}, d.duration, d.steps);
  psi = dense_reference(sys, loop, psi);
  psi = rotation_u(sys, 0, theta).matrix().adjoint() * psi;
  psi = rotation_u(sys, 0, kPi / 2).matrix().adjoint() * psi;
  for (int k = 0; k < 3; ++k) CHECK(std::abs(rep.populations[k] - std::norm(psi(k))) < 1e-9);

  CHECK(rep.overlap_jj < 0.01);
  CHECK(rep.mode_b_population > 0.5 * rep.total_atoms);
  CHECK(rep.fock_labels.back() == TwoModeFock{2, 0});
  const auto ideal = detection_prediction(sys, theta);
  CHECK(ideal[0] == doctest::Approx(1.0));
}

TEST_CASE("detection protocol ramp variants approach the ideal populations") {
  const auto sys = SpinSystem::from_j(2);
  const auto ideal = detection_prediction(sys, 1.1);
  for (RampMode mode : {RampMode::instantaneous, RampMode::adiabatic}) {
    DetectionSettings d;
    d.theta = 1.1;
    d.alpha0 = 50.0;
    d.ramp = mode;
    d.duration = snap_duration(50.0, 400.0);
    d.steps = 40000;
    const auto rep = detection_protocol(sys, d);
    for (std::size_t k = 0; k < ideal.size(); ++k) CHECK(std::abs(rep.populations[k] - ideal[k]) < 5e-3);
    CHECK(rep.max_norm_error < 1e-10);
  }
}

TEST_CASE("detection protocol with no solid angle returns |j,j>") {
  const auto sys = SpinSystem::from_j(5);
  for (RampMode mode : {RampMode::instantaneous, RampMode::adiabatic}) {
    DetectionSettings d;
    d.theta = 0.0;
    d.alpha0 = 5.0;
    d.ramp = mode;
    d.duration = snap_duration(5.0, 100.0);
    d.steps = 10000;
    const auto rep = detection_protocol(sys, d);
    CHECK(1.0 - rep.overlap_jj < 1e-4);
    CHECK(rep.mode_b_population < 1e-3);
  }
}

TEST_CASE("detection protocol warns when dynamical phases do not cancel") {
  DetectionSettings d;
  d.theta = 0.5;
  d.alpha0 = 1.0;
  d.duration = 100.0;
  d.steps = 1000;
  const auto rep = detection_protocol(SpinSystem::from_j(1), d);
  REQUIRE(rep.warning.has_value());
  CHECK(rep.dynamical_residual > 1e-6);
}

TEST_CASE("adiabatic holonomy") {
  const auto sys = SpinSystem::from_j(10);
  AdiabaticHolonomySettings s;
  s.m = 0;
  s.beta0 = 1.0;
  s.alpha0 = -1.5;
  CHECK_THROWS_AS(adiabatic_holonomy(sys, s), std::invalid_argument);
  s.alpha0.reset();

  s.rect = Rectangle{0.0, 0.5, 1.0, 1.0};
  s.duration = 3200;
  s.steps = 64000;
  const auto flat = adiabatic_holonomy(SpinSystem::from_j(2), s);
  CHECK(max_entry(flat.holonomy.u - Matrix::Identity(2, 2)) < 1e-3);

  const double t0 = kPi / 3;
  s.rect = transfer_rectangle(sys, 0, t0, t0 + kPi / (2 * rho(sys, 0)));
  s.duration = 2000;
  s.steps = 40000;
  const auto res = adiabatic_holonomy(sys, s);
  const auto po = holonomy_path_ordered(analytic_connection(sys, DegenerateSubspace::pair(sys, 0)),
                                        LoopPath::rectangle(s.rect, 4));
  CHECK(frobenius_distance(res.holonomy.u, po.u) < 0.05);
  CHECK(res.max_leakage < 1e-3);
  CHECK(res.unitarity_error < 1e-3);
  CHECK(res.holonomy.method == HolonomyMethod::adiabatic);

  s.duration = 1.0;
  s.steps = 200;
  CHECK_THROWS_AS(adiabatic_holonomy(sys, s), SubspaceLeakage);
}
