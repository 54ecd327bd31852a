#include "holobec/perturbation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "holobec/errors.hpp"
#include "holobec/hamiltonian.hpp"

namespace holobec {

CoefficientTable::CoefficientTable(double alpha0, double beta0, int max_order)
    : alpha0_(alpha0), beta0_(beta0), max_order_(max_order) {
  if (alpha0 == 0.0 || !std::isfinite(alpha0) || !std::isfinite(beta0)) {
    throw std::invalid_argument("generator coefficients need a finite, nonzero alpha0");
  }
  if (max_order < 0) throw std::invalid_argument("max_order must be >= 0");
  by_order_.resize(max_order + 1);
  double scale = -1.0 / alpha0;  // (-1)^{n+1} beta0^n / alpha0^{n+1}
  for (int n = 0; n <= max_order; ++n) {
    auto& row = by_order_[n];
    row.resize(n + 1);
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      row[k] = binom * scale;
      binom = binom * (n - k) / (k + 1);
    }
    scale *= -beta0 / alpha0;
  }
}

double CoefficientTable::operator()(int k, int l) const {
  if (k < 0 || l < 0 || k + l > max_order_) throw std::out_of_range("coefficient index outside table");
  return by_order_[k + l][k];
}

CoefficientTable coefficients(double alpha0, double beta0, int max_order) {
  return CoefficientTable(alpha0, beta0, max_order);
}

double convergence_ratio(const SpinSystem& sys, double alpha0, double beta0) {
  return std::abs(beta0) * (2.0 * sys.j() - 1.0) / std::abs(alpha0);
}

TruncatedGenerator generator_truncated(const SpinSystem& sys, double alpha0, double beta0, int max_order) {
  const CoefficientTable table(alpha0, beta0, max_order);
  const int n = sys.dim();
  const Matrix jy = build_spin_operators(sys).jy.matrix();

  // Powers m^p for p = 0..max_order, per basis index.
  Eigen::MatrixXd powers(n, max_order + 1);
  for (int i = 0; i < n; ++i) {
    powers(i, 0) = 1.0;
    for (int p = 1; p <= max_order; ++p) powers(i, p) = powers(i, p - 1) * sys.m_at(i);
  }

  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int c : {i - 1, i + 1}) {
      if (c < 0 || c >= n) continue;
      // (Jz^k Jy Jz^l)_{i,c} = m_i^k (Jy)_{i,c} m_c^l
      double sum = 0.0;
      for (int order = 0; order <= max_order; ++order) {
        for (int k = 0; k <= order; ++k) sum += table(k, order - k) * powers(i, k) * powers(c, order - k);
      }
      g(i, c) = sum * jy(i, c);
    }
  }

  TruncatedGenerator out{Operator(std::move(g), n > 1 ? Structure::tridiagonal : Structure::diagonal), std::nullopt};
  const double ratio = convergence_ratio(sys, alpha0, beta0);
  if (ratio >= 1.0) {
    std::ostringstream msg;
    msg << "series diverges: |beta0|(2j-1)/|alpha0| = " << ratio << " >= 1";
    out.divergence_warning = msg.str();
  }
  return out;
}

Operator generator_resummed(const SpinSystem& sys, double alpha0, double beta0, double tol) {
  const int n = sys.dim();
  const Matrix jy = build_spin_operators(sys).jy.matrix();
  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double denom = alpha0 + beta0 * (sys.m_at(i) + sys.m_at(i + 1));
    if (!(std::abs(denom) >= tol)) {
      std::ostringstream msg;
      msg << "H0 is degenerate: alpha0 + beta0 (m + m') = " << denom << " for m = " << sys.m_at(i);
      throw DegenerateHamiltonian(msg.str());
    }
    g(i + 1, i) = -jy(i + 1, i) / denom;
    g(i, i + 1) = -jy(i, i + 1) / denom;
  }
  return Operator(std::move(g), n > 1 ? Structure::tridiagonal : Structure::diagonal);
}

double first_order_check(const SpinSystem& sys, double alpha0, double beta0, double gamma) {
  const Operator g = generator_resummed(sys, alpha0, beta0);
  const Operator h0 = build_h0(sys, alpha0, beta0);
  const Matrix u = expm(g, cplx(0.0, gamma)).matrix();
  const Matrix target = h0.matrix() + gamma * build_spin_operators(sys).jx.matrix();
  return (u * h0.matrix() * u.adjoint() - target).norm();
}

}  // namespace holobec
