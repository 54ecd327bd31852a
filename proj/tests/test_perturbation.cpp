#include <cmath>
#include <random>

#include "doctest.h"
#include "holobec/errors.hpp"
#include "holobec/hamiltonian.hpp"
#include "holobec/perturbation.hpp"
#include "support.hpp"

using namespace holobec;
using testing_support::max_entry;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Direct evaluation of the coefficient formula.
double a_kl(int k, int l, double a0, double b0) {
  const int n = k + l;
  return std::pow(-1.0, n + 1) * factorial(n) / (factorial(k) * factorial(l)) * std::pow(b0, n) / std::pow(a0, n + 1);
}

// Jz^k Jy Jz^l by repeated matrix products.
Matrix brute_generator(const SpinSystem& sys, double a0, double b0, int order) {
  const auto o = build_spin_operators(sys);
  Matrix g = Matrix::Zero(sys.dim(), sys.dim());
  for (int n = 0; n <= order; ++n) {
    for (int k = 0; k <= n; ++k) {
      Matrix left = Matrix::Identity(sys.dim(), sys.dim());
      for (int i = 0; i < k; ++i) left = left * o.jz.matrix();
      Matrix right = Matrix::Identity(sys.dim(), sys.dim());
      for (int i = 0; i < n - k; ++i) right = right * o.jz.matrix();
      g += a_kl(k, n - k, a0, b0) * left * o.jy.matrix() * right;
    }
  }
  return g;
}

}  // namespace

TEST_CASE("coefficient table") {
  const CoefficientTable t(2.0, 0.3, 6);
  CHECK(t(0, 0) == doctest::Approx(-0.5));
  CHECK(t(1, 0) == doctest::Approx(0.3 / 4.0));
  CHECK(t(0, 1) == t(1, 0));
  for (int k = 0; k <= 6; ++k) {
    for (int l = 0; k + l <= 6; ++l) {
      CHECK(t(k, l) == doctest::Approx(a_kl(k, l, 2.0, 0.3)).epsilon(1e-13));
      CHECK(t(k, l) == t(l, k));
    }
  }
  const auto zero = coefficients(1.5, 0.0, 5);
  CHECK(zero(0, 0) == doctest::Approx(-1 / 1.5));
  for (int n = 1; n <= 5; ++n) CHECK(zero(n, 0) == 0.0);
  CHECK_THROWS_AS(coefficients(0.0, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(coefficients(1.0, 1.0, -1), std::invalid_argument);
  CHECK_THROWS_AS(t(4, 3), std::out_of_range);
}

TEST_CASE("truncated generator matches direct operator products") {
  const auto sys = SpinSystem::from_j(3);
  const auto g = generator_truncated(sys, 1.3, 0.1, 7);
  CHECK(max_entry(g.g.matrix() - brute_generator(sys, 1.3, 0.1, 7)) < 1e-13);
  CHECK_FALSE(g.divergence_warning.has_value());

  const auto o = build_spin_operators(sys);
  CHECK(max_entry(generator_truncated(sys, 2.0, 0.0, 0).g.matrix() + o.jy.matrix() / 2.0) < 1e-15);
}

TEST_CASE("resummed generator") {
  const auto sys = SpinSystem::from_j(1);
  const auto g = generator_resummed(sys, 2.0, 0.3);
  const auto o = build_spin_operators(sys);
  CHECK(std::abs(g(2, 1) + o.jy(2, 1) / 2.3) < 1e-15);
  const auto series = generator_truncated(sys, 2.0, 0.3, 60);
  CHECK(std::abs(series.g(2, 1) - g(2, 1)) < 1e-12);
  CHECK(max_entry(generator_resummed(SpinSystem::from_j(4), 3.0, 0.0).matrix() +
                  build_spin_operators(SpinSystem::from_j(4)).jy.matrix() / 3.0) < 1e-15);

  CHECK_THROWS_AS(generator_resummed(SpinSystem::from_j(3), 1.0, -1.0), DegenerateHamiltonian);
}

TEST_CASE("series converges to the resummed generator inside the region") {
  const auto sys = SpinSystem::from_j(2);
  CHECK(max_entry(generator_truncated(sys, 1.0, 0.1, 40).g.matrix() - generator_resummed(sys, 1.0, 0.1).matrix()) <
        1e-10);

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  std::uniform_real_distribution<double> frac(-0.5, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const SpinSystem s(2 + trial % 19);
    const double a0 = (trial % 2 ? -1.0 : 1.0) * u(rng);
    const double b0 = frac(rng) * std::abs(a0) / (2.0 * s.j() - 1.0);
    REQUIRE(convergence_ratio(s, a0, b0) <= 0.5);
    const Matrix exact = generator_resummed(s, a0, b0).matrix();
    CHECK(max_entry(generator_truncated(s, a0, b0, 60).g.matrix() - exact) < 1e-8);

    // Successive partial-sum changes shrink geometrically.
    double prev_change = 1e9;
    Matrix prev = generator_truncated(s, a0, b0, 4).g.matrix();
    for (int n = 5; n <= 12; ++n) {
      const Matrix cur = generator_truncated(s, a0, b0, n).g.matrix();
      const double change = max_entry(cur - prev);
      CHECK(change <= prev_change * 0.75 + 1e-300);
      prev_change = change;
      prev = cur;
    }
  }
}

TEST_CASE("divergence warning outside the region") {
  const auto sys = SpinSystem::from_j(3);
  const auto g = generator_truncated(sys, 1.0, 0.5, 10);
  REQUIRE(g.divergence_warning.has_value());
  CHECK(g.divergence_warning->find(">= 1") != std::string::npos);
}

TEST_CASE("generators are Hermitian and solve i[G, H0] = Jx") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int tested = 0;
  while (tested < 20) {
    const SpinSystem s(1 + static_cast<int>(rng() % 20));
    const double a0 = u(rng), b0 = u(rng);
    bool valid = std::abs(a0) > 1e-3;
    for (int i = 0; i + 1 < s.dim(); ++i) valid = valid && std::abs(a0 + b0 * (s.m_at(i) + s.m_at(i + 1))) > 1e-6;
    if (!valid) continue;
    ++tested;
    const Operator g = generator_resummed(s, a0, b0);
    CHECK(g.is_hermitian(1e-12));
    const Matrix lhs = kI * commutator(g, build_h0(s, a0, b0)).matrix();
    CHECK(max_entry(lhs - build_spin_operators(s).jx.matrix()) < 1e-12);
    if (convergence_ratio(s, a0, b0) < 1.0) CHECK(generator_truncated(s, a0, b0, 8).g.is_hermitian(1e-12));
  }
}

TEST_CASE("first-order equivalence is quadratic in gamma") {
  const auto sys = SpinSystem::from_j(5);
  CHECK(first_order_check(sys, 1.0, 0.05, 0.0) < 1e-13);
  for (double b0 : {0.05, 0.0, -0.07}) {
    const double ratio = first_order_check(sys, 1.0, b0, 0.01) / first_order_check(sys, 1.0, b0, 0.005);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}
