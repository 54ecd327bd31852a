#include "holobec/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace holobec {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
}

}  // namespace

ReducedParams reduce_params(const PhysicalParams& p, const SpinSystem& sys, double t) {
  require_finite(p.omega_a, "omega_a");
  require_finite(p.omega_b, "omega_b");
  require_finite(p.u_a, "U_a");
  require_finite(p.u_b, "U_b");
  require_finite(p.u_ab, "U_ab");
  require_finite(p.lambda, "lambda");
  require_finite(p.detuning, "detuning");
  require_finite(t, "t");
  if (p.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");

  const double j = sys.j();
  ReducedParams r;
  r.alpha = p.omega_a - p.omega_b + (2.0 * j - 1.0) * (p.u_a - p.u_b) / 2.0;
  r.beta = (p.u_a + p.u_b - p.u_ab) / 2.0;
  r.gamma = -2.0 * p.lambda;
  r.phi = p.detuning * t;
  return r;
}

Operator build_hamiltonian(const SpinSystem& sys, const ReducedParams& r) {
  const int n = sys.dim();
  Matrix h = Matrix::Zero(n, n);
  // cos(phi) Jx + sin(phi) Jy = (e^{-i phi} J+ + e^{i phi} J-) / 2
  const cplx raise = 0.5 * r.gamma * std::exp(cplx(0.0, -r.phi));
  for (int i = 0; i < n; ++i) {
    const double m = sys.m_at(i);
    h(i, i) = r.alpha * m + r.beta * m * m;
    if (i + 1 < n) {
      const double c = ladder(sys.j(), m);
      h(i + 1, i) = raise * c;
      h(i, i + 1) = std::conj(raise) * c;
    }
  }
  return Operator(std::move(h), n > 1 ? Structure::tridiagonal : Structure::diagonal);
}

Eigen::VectorXd h0_energies(const SpinSystem& sys, double alpha0, double beta0) {
  Eigen::VectorXd e(sys.dim());
  for (int i = 0; i < sys.dim(); ++i) {
    const double m = sys.m_at(i);
    e(i) = alpha0 * m + beta0 * m * m;
  }
  return e;
}

Operator build_h0(const SpinSystem& sys, double alpha0, double beta0) {
  return Operator(h0_energies(sys, alpha0, beta0).cast<cplx>().asDiagonal().toDenseMatrix(), Structure::diagonal);
}

double degeneracy_ratio(double m) {
  if (!std::isfinite(m) || std::abs(2.0 * m - std::round(2.0 * m)) > 1e-12) {
    throw std::invalid_argument("degeneracy_ratio: m must be a half-integer");
  }
  return -(2.0 * m + 1.0);
}

Operator conjugated_hamiltonian(const SpinSystem& sys, double alpha0, double beta0, double phi, double theta) {
  const Operator u = rotation_u(sys, phi, theta);
  Matrix h = u.matrix() * h0_energies(sys, alpha0, beta0).cast<cplx>().asDiagonal() * u.matrix().adjoint();
  // Exact conjugation of a Hermitian matrix; symmetrize away rounding.
  h = 0.5 * (h + h.adjoint()).eval();
  return Operator(std::move(h), Structure::dense);
}

}  // namespace holobec
