#pragma once

// Internal numerical helpers shared by the library modules.

#include <Eigen/Dense>

#include "holobec/spin.hpp"

namespace holobec::detail {

/// Eigenpairs of a Hermitian tridiagonal matrix H = D S D^dagger where S is
/// real symmetric tridiagonal and D a diagonal phase gauge.
struct TridiagonalSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // eigenvectors of S, columns
  Vector gauge;             // diagonal of D

  /// exp(scale * H) v
  Vector apply_exp(cplx scale, const Vector& v) const;
  /// sum_k lambda_k |<k|v>|^2
  double expectation(const Vector& v) const;
  Matrix exp_matrix(cplx scale) const;
};

/// diag: real diagonal; sub: H(k+1, k).
TridiagonalSpectrum tridiagonal_spectrum(const Eigen::VectorXd& diag, const Vector& sub);

/// Splits a Hermitian tridiagonal matrix into its real diagonal and complex subdiagonal.
void tridiagonal_bands(const Matrix& h, Eigen::VectorXd& diag, Vector& sub);

bool all_finite(const Matrix& m);

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace holobec::detail
