#pragma once

// Two-mode condensate Hamiltonians written with Schwinger spin operators.

#include "holobec/spin.hpp"

namespace holobec {

/// Two-mode parameters (hbar = 1).
struct PhysicalParams {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double u_a = 0.0;
  double u_b = 0.0;
  double u_ab = 0.0;
  double lambda = 0.0;    // laser coupling, >= 0
  double detuning = 0.0;  // rad per unit time
};

/// H = alpha Jz + beta Jz^2 + gamma (cos(phi) Jx + sin(phi) Jy)
struct ReducedParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
};

/// alpha = w_a - w_b + (2j - 1)(U_a - U_b)/2, beta = (U_a + U_b - U_ab)/2,
/// gamma = -2 lambda, phi = detuning * t.
///
/// The gamma factor is what the Schwinger substitution of the exchange term
/// -lambda (a^dag b e^{-i phi} + h.c.) produces. Throws std::invalid_argument
/// on non-finite input or negative lambda.
ReducedParams reduce_params(const PhysicalParams& p, const SpinSystem& sys, double t);

/// Hermitian tridiagonal operator in the |j,m> basis.
Operator build_hamiltonian(const SpinSystem& sys, const ReducedParams& r);

/// H0 = alpha0 Jz + beta0 Jz^2 (diagonal).
Operator build_h0(const SpinSystem& sys, double alpha0, double beta0);

/// Diagonal energies alpha0 m + beta0 m^2, ascending m.
Eigen::VectorXd h0_energies(const SpinSystem& sys, double alpha0, double beta0);

/// alpha0/beta0 value making |j,m> and |j,m+1> degenerate: -(2m+1).
/// m may be half-integer; throws std::invalid_argument otherwise.
double degeneracy_ratio(double m);

/// U(phi, theta) H0 U^dag(phi, theta), dense.
Operator conjugated_hamiltonian(const SpinSystem& sys, double alpha0, double beta0, double phi, double theta);

}  // namespace holobec
