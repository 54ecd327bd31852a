#pragma once

// Generator G of the weak-coupling rotation U(gamma) = exp(i gamma G) that
// maps H0 = alpha0 Jz + beta0 Jz^2 to H0 + gamma Jx at first order:
//
//   G = sum_{k,l} a_kl Jz^k Jy Jz^l,
//   a_kl = (-1)^{k+l+1} (k+l)!/(k! l!) beta0^{k+l} / alpha0^{k+l+1}.

#include <optional>
#include <string>
#include <vector>

#include "holobec/spin.hpp"

namespace holobec {

/// a_kl for k + l <= max_order, stored by total order n = k + l.
class CoefficientTable {
 public:
  CoefficientTable(double alpha0, double beta0, int max_order);

  double operator()(int k, int l) const;
  int max_order() const noexcept { return max_order_; }
  double alpha0() const noexcept { return alpha0_; }
  double beta0() const noexcept { return beta0_; }

 private:
  double alpha0_;
  double beta0_;
  int max_order_;
  std::vector<std::vector<double>> by_order_;  // by_order_[n][k], l = n - k
};

/// Throws std::invalid_argument if alpha0 == 0 or max_order < 0.
CoefficientTable coefficients(double alpha0, double beta0, int max_order);

/// The series converges for every matrix element when |beta0| (2j - 1) < |alpha0|.
double convergence_ratio(const SpinSystem& sys, double alpha0, double beta0);

struct TruncatedGenerator {
  Operator g;
  /// Set when the parameters sit outside the convergence region.
  std::optional<std::string> divergence_warning;
};

/// Partial sum up to total order max_order. Jz powers act as diagonal
/// scalings, so each term costs O(dim).
TruncatedGenerator generator_truncated(const SpinSystem& sys, double alpha0, double beta0, int max_order);

/// Summed series: G_{m',m} = -(Jy)_{m',m} / (alpha0 + beta0 (m + m')).
/// Throws DegenerateHamiltonian when a denominator vanishes (|.| < tol).
Operator generator_resummed(const SpinSystem& sys, double alpha0, double beta0, double tol = 1e-12);

/// || exp(i gamma G) H0 exp(-i gamma G) - (H0 + gamma Jx) ||_F with the
/// resummed generator.
double first_order_check(const SpinSystem& sys, double alpha0, double beta0, double gamma);

}  // namespace holobec
