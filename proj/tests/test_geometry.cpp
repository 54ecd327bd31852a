#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "holobec/errors.hpp"
#include "holobec/geometry.hpp"
#include "holobec/hamiltonian.hpp"
#include "support.hpp"

using namespace holobec;
using testing_support::max_entry;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix identity(int n) { return Matrix::Identity(n, n); }

std::vector<cplx> sorted_spectrum(const Matrix& u) {
  Eigen::ComplexEigenSolver<Matrix> s(u);
  std::vector<cplx> v(s.eigenvalues().data(), s.eigenvalues().data() + s.eigenvalues().size());
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return std::arg(a) < std::arg(b); });
  return v;
}

}  // namespace

TEST_CASE("phase wrapping") {
  CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_phase(-6 * kPi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(phase_distance(kPi - 1e-4, -kPi + 1e-4) == doctest::Approx(2e-4).epsilon(1e-6));
  const auto p = make_phase(-6 * kPi);
  CHECK(p.raw == -6 * kPi);
  CHECK(std::abs(p.wrapped) < 1e-12);
}

TEST_CASE("degenerate subspaces from H0") {
  const auto sys = SpinSystem::from_j(4);
  const auto sub = DegenerateSubspace::from_h0(sys, degeneracy_ratio(1), 1.0, 1);
  REQUIRE(sub.size() == 2);
  CHECK(sub.is_adjacent_pair());
  CHECK(sub.lowest_m() == 1);
  CHECK(DegenerateSubspace::from_h0(sys, 1.0, 0.0, 2).size() == 1);
  CHECK_THROWS_AS(DegenerateSubspace(sys, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DegenerateSubspace::single(sys, 5), std::out_of_range);
  // beta0 = 0 with alpha0 = 0 makes everything degenerate.
  CHECK(DegenerateSubspace::from_h0(sys, 0.0, 0.0, 0).size() == 9);
}

TEST_CASE("analytic connection examples") {
  const auto sys = SpinSystem::from_j(1);
  auto a = connection_analytic(sys, DegenerateSubspace::single(sys, 1), 0.4, kPi / 2);
  CHECK(std::abs(a.a_phi(0, 0)) < 1e-15);

  const auto pair = DegenerateSubspace::pair(sys, 0);
  CHECK(rho(sys, 0) == doctest::Approx(std::sqrt(2.0)));
  a = connection_analytic(sys, pair, 0.0, 0.9);
  Matrix at(2, 2);
  at << 0, std::sqrt(2.0) / 2, -std::sqrt(2.0) / 2, 0;
  CHECK(max_entry(a.a_theta - at) < 1e-15);

  const auto big = SpinSystem::from_j(3);
  a = connection_analytic(big, DegenerateSubspace::pair(big, 1), 0.2, 0.0);
  Matrix ap = Matrix::Zero(2, 2);
  ap(0, 0) = cplx(0, -1);
  ap(1, 1) = cplx(0, -2);
  CHECK(max_entry(a.a_phi - ap) < 1e-15);

  CHECK_THROWS_AS(connection_analytic(big, DegenerateSubspace(big, {0, 1, 2}), 0, 0.3), UnsupportedSubspace);
  CHECK_THROWS_AS(connection_analytic(big, DegenerateSubspace(big, {0, 2}), 0, 0.3), UnsupportedSubspace);
}

TEST_CASE("analytic and finite-difference connections agree on a grid") {
  for (double j : {1.0, 5.0, 10.0}) {
    const auto sys = SpinSystem::from_j(j);
    std::vector<DegenerateSubspace> subs{DegenerateSubspace::single(sys, 0), DegenerateSubspace::single(sys, j),
                                         DegenerateSubspace::pair(sys, 0), DegenerateSubspace::pair(sys, -j)};
    for (const auto& sub : subs) {
      double worst = 0.0;
      for (int a = 0; a < 10; ++a) {
        for (int b = 0; b < 10; ++b) {
          const double phi = 2.0 * kPi * a / 10.0;
          const double theta = 0.05 + (kPi - 0.1) * b / 9.0;
          const auto an = connection_analytic(sys, sub, phi, theta);
          const auto nu = connection_numeric(sys, sub, phi, theta);
          worst = std::max({worst, max_entry(an.a_phi - nu.a_phi), max_entry(an.a_theta - nu.a_theta)});
        }
      }
      CHECK(worst < 1e-6);
    }
    CHECK(max_entry(connection_numeric(sys, DegenerateSubspace::single(sys, 0), 1.1, 0.7).a_phi) < 1e-9);
  }
  const auto sys = SpinSystem::from_j(2);
  CHECK_THROWS_AS(connection_numeric(sys, DegenerateSubspace::single(sys, 0), 0, 0, 1e-2), std::invalid_argument);
}

TEST_CASE("field strength") {
  const auto sys = SpinSystem::from_j(3);
  const Matrix f = field_strength(sys, DegenerateSubspace::single(sys, 2), 0.0, kPi / 6);
  CHECK(std::abs(f(0, 0) - kI) < 1e-7);
  CHECK(std::abs(field_strength(sys, DegenerateSubspace::single(sys, 0), 0.3, 1.0)(0, 0)) < 1e-9);

  // Degenerate pair: the derivative part is the componentwise d_theta A_phi,
  // and the commutator is added.
  const auto pair = DegenerateSubspace::pair(sys, 0);
  const double theta = 0.8;
  const auto a = connection_analytic(sys, pair, 0.0, theta);
  const double r = rho(sys, 0);
  Matrix d_theta_aphi(2, 2);
  d_theta_aphi << kI * 0.0 * std::sin(theta), kI * (r / 2) * std::cos(theta), kI * (r / 2) * std::cos(theta),
      kI * 1.0 * std::sin(theta);
  const Matrix want = d_theta_aphi + a.a_phi * a.a_theta - a.a_theta * a.a_phi;
  CHECK(max_entry(field_strength(sys, pair, 0.0, theta) - want) < 1e-7);
}

TEST_CASE("Berry phase closed form and flux quadrature") {
  CHECK(berry_phase_closed(1, kPi / 3).raw == doctest::Approx(-kPi));
  CHECK(berry_phase_closed(0, 1.2).raw == 0.0);
  CHECK(berry_phase_closed(4, 0.0).raw == 0.0);
  CHECK(std::abs(berry_phase_flux(1, kPi / 3).raw + kPi) < 1e-6);
  CHECK(std::abs(berry_phase_flux(3, kPi / 2).raw + 6 * kPi) < 1e-6);
  CHECK(std::abs(berry_phase_flux(2, 0.0).raw) < 1e-12);
  CHECK(std::abs(berry_phase_flux(0.5, 2.0).raw - berry_phase_closed(0.5, 2.0).raw) < 1e-6);
  CHECK_THROWS_AS(berry_phase_flux(1, 1, 8), std::invalid_argument);
}

TEST_CASE("loop paths") {
  CHECK_THROWS_AS(LoopPath(std::vector<ControlPoint>(5)), std::invalid_argument);
  const auto circle = LoopPath::circle_at_theta(0.4, 16);
  CHECK(circle.closed());
  CHECK(circle.winding() == 1);
  CHECK_FALSE(circle.as_rectangle().has_value());
  const Rectangle r{0.1, 0.9, 0.3, 0.7};
  const auto rect = LoopPath::rectangle(r, 4);
  CHECK(rect.segments() == 16);
  REQUIRE(rect.as_rectangle().has_value());
  CHECK(rect.as_rectangle()->phi1 == r.phi1);
  CHECK(rect.as_rectangle()->theta1 == r.theta1);
  CHECK_FALSE(LoopPath::ellipse({1, 1}, 0.2, 0.1, 32).as_rectangle().has_value());
}

TEST_CASE("path-ordered holonomy basics") {
  const auto sys = SpinSystem::from_j(5);
  const auto field = analytic_connection(sys, DegenerateSubspace::pair(sys, 1));

  std::vector<ControlPoint> there_and_back;
  for (int i = 0; i <= 8; ++i) there_and_back.push_back({0.1 * i, 0.3 + 0.05 * i});
  for (int i = 7; i >= 0; --i) there_and_back.push_back({0.1 * i, 0.3 + 0.05 * i});
  const auto h = holonomy_path_ordered(field, LoopPath(there_and_back));
  CHECK(max_entry(h.u - identity(2)) < 1e-8);
  CHECK(h.is_unitary(1e-10));

  std::vector<ControlPoint> open;
  for (int i = 0; i <= 8; ++i) open.push_back({0.1 * i, 0.3});
  CHECK_THROWS_AS(holonomy_path_ordered(field, LoopPath(open)), OpenLoop);
}

TEST_CASE("Abelian holonomy of a phi loop is the Berry phase") {
  for (double m = 0; m <= 5; m += 0.5) {
    const auto sys = SpinSystem::from_j(m == 0 ? 1.0 : m);
    const auto field = analytic_connection(sys, DegenerateSubspace::single(sys, m));
    for (double theta : {0.2, kPi / 6, kPi / 3, kPi / 2, 2.0, 3.0}) {
      const auto h = holonomy_path_ordered(field, LoopPath::circle_at_theta(theta, 64));
      CHECK(phase_distance(std::arg(h.u(0, 0)), berry_phase_closed(m, theta).wrapped) < 1e-4);
    }
  }
}

TEST_CASE("path-ordered holonomy converges at second order on a curved loop") {
  const auto sys = SpinSystem::from_j(4);
  const auto field = analytic_connection(sys, DegenerateSubspace::pair(sys, 0));
  const auto loop = [](int k) { return LoopPath::ellipse({0.7, 1.1}, 0.5, 0.4, k); };
  for (int k : {16, 32, 64}) {
    const double d1 = frobenius_distance(holonomy_path_ordered(field, loop(k)).u,
                                         holonomy_path_ordered(field, loop(2 * k)).u);
    const double d2 = frobenius_distance(holonomy_path_ordered(field, loop(2 * k)).u,
                                         holonomy_path_ordered(field, loop(4 * k)).u);
    const double ratio = d2 / d1;
    CHECK(ratio >= 0.2);
    CHECK(ratio <= 0.8);
  }
}

TEST_CASE("holonomy spectrum is gauge covariant") {
  std::mt19937 rng(21);
  const auto sys = SpinSystem::from_j(6);
  const auto field = analytic_connection(sys, DegenerateSubspace::pair(sys, -2));
  const auto loop = LoopPath::ellipse({0.3, 1.3}, 0.8, 0.5, 128);
  const auto base = sorted_spectrum(holonomy_path_ordered(field, loop).u);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = testing_support::random_hermitian(rng, 2, 2.0);
    const Matrix v = unitary_exp(kI * h);
    const auto moved = sorted_spectrum(holonomy_path_ordered(gauge_transformed(field, v), loop).u);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(moved[k] - base[k]) < 1e-8);
  }
}

TEST_CASE("closed-form holonomy") {
  const auto sys = SpinSystem::from_j(50);
  const double r = rho(sys, 0);
  const double t0 = kPi / 3;
  CHECK(max_entry(holonomy_closed_form(sys, 0, t0, t0).u - identity(2)) < 1e-15);
  const auto full = holonomy_closed_form(sys, 0, t0, t0 + kPi / (2 * r));
  CHECK(full.is_unitary(1e-12));
  CHECK(std::norm(full.u(1, 0)) > 0.95);
  CHECK(std::norm(full.u(0, 1)) > 0.95);
  const auto half = holonomy_closed_form(sys, 0, t0, t0 + kPi / (4 * r));
  CHECK(std::abs(std::norm(half.u(0, 0)) - 0.5) < 0.05);
  CHECK(std::abs(std::norm(half.u(1, 0)) - 0.5) < 0.05);
  CHECK_THROWS_AS(holonomy_closed_form(sys, 0, 0.0, 0.1), std::domain_error);
}

TEST_CASE("closed form approaches the path-ordered product as j grows") {
  double previous = 1e9;
  for (double j : {10.0, 30.0, 100.0}) {
    const auto sys = SpinSystem::from_j(j);
    const double t0 = kPi / 3;
    const double t1 = t0 + kPi / (2 * rho(sys, 0));
    const auto rect = transfer_rectangle(sys, 0, t0, t1);
    const auto po = holonomy_path_ordered(analytic_connection(sys, DegenerateSubspace::pair(sys, 0)),
                                          LoopPath::rectangle(rect, 8));
    const double d = frobenius_distance(po.u, holonomy_closed_form(sys, 0, t0, t1).u);
    CHECK(d < previous);
    previous = d;
  }
  CHECK(previous <= 0.05);
}

TEST_CASE("Stokes holonomy") {
  const auto sys = SpinSystem::from_j(5);
  const auto field = analytic_connection(sys, DegenerateSubspace::pair(sys, 0));
  const Rectangle flat{0.0, 1.0, 0.7, 0.7};
  CHECK(max_entry(holonomy_stokes(field, flat, {16, 16}).u - identity(2)) < 1e-12);

  const double t0 = kPi / 3;
  const auto rect = transfer_rectangle(sys, 0, t0, t0 + kPi / (2 * rho(sys, 0)));
  const auto po = holonomy_path_ordered(field, LoopPath::rectangle(rect, 4));
  const auto st = holonomy_stokes(field, LoopPath::rectangle(rect, 4), StokesGrid{128, 128});
  CHECK(st.is_unitary(1e-10));
  CHECK(frobenius_distance(po.u, st.u) < 1e-3);

  // Reversed orientation gives the inverse.
  const Rectangle back{rect.phi1, rect.phi0, rect.theta0, rect.theta1};
  const auto rev = holonomy_stokes(field, back, StokesGrid{128, 128});
  const auto po_rev = holonomy_path_ordered(field, LoopPath::rectangle(back, 4));
  CHECK(frobenius_distance(rev.u, po_rev.u) < 1e-3);

  CHECK_THROWS_AS(holonomy_stokes(field, LoopPath::ellipse({1, 1}, 0.2, 0.2, 32), StokesGrid{}), NonRectangularLoop);
}

TEST_CASE("unitary_exp closed forms match the series") {
  std::mt19937 rng(4);
  for (int n : {1, 2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix x = kI * testing_support::random_hermitian(rng, n, 3.0);
      CHECK(max_entry(unitary_exp(x) - expm_series(x, 1.0)) < 1e-12);
    }
  }
}
