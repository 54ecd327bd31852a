#include "holobec/spin.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "linalg.hpp"

namespace holobec {

namespace detail {

TridiagonalSpectrum tridiagonal_spectrum(const Eigen::VectorXd& diag, const Vector& sub) {
  const Eigen::Index n = diag.size();
  TridiagonalSpectrum out;
  out.gauge = Vector::Ones(n);
  Eigen::VectorXd real_sub(n > 0 ? n - 1 : 0);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double mag = std::abs(sub(k));
    real_sub(k) = mag;
    out.gauge(k + 1) = mag > 0.0 ? out.gauge(k) * (sub(k) / mag) : out.gauge(k);
  }
  if (n == 1) {
    out.values = diag;
    out.vectors = Eigen::MatrixXd::Ones(1, 1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, real_sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("tridiagonal eigensolver did not converge");
  }
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

Vector TridiagonalSpectrum::apply_exp(cplx scale, const Vector& v) const {
  Vector w = gauge.conjugate().cwiseProduct(v);
  Vector c = vectors.transpose().cast<cplx>() * w;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(scale * values(k));
  return gauge.cwiseProduct(vectors.cast<cplx>() * c);
}

double TridiagonalSpectrum::expectation(const Vector& v) const {
  Vector w = gauge.conjugate().cwiseProduct(v);
  Vector c = vectors.transpose().cast<cplx>() * w;
  double e = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) e += values(k) * std::norm(c(k));
  return e;
}

Matrix TridiagonalSpectrum::exp_matrix(cplx scale) const {
  const Eigen::Index n = values.size();
  Matrix q = vectors.cast<cplx>();
  Matrix left = gauge.asDiagonal() * q;
  Vector phases(n);
  for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::exp(scale * values(k));
  return left * phases.asDiagonal() * left.adjoint();
}

void tridiagonal_bands(const Matrix& h, Eigen::VectorXd& diag, Vector& sub) {
  const Eigen::Index n = h.rows();
  diag = h.diagonal().real();
  sub.resize(n > 0 ? n - 1 : 0);
  for (Eigen::Index k = 0; k + 1 < n; ++k) sub(k) = h(k + 1, k);
}

bool all_finite(const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SpinSystem

SpinSystem::SpinSystem(int two_j) : two_j_(two_j) {
  if (two_j < 1) throw std::invalid_argument("spin requires 2j >= 1, got 2j=" + std::to_string(two_j));
}

SpinSystem SpinSystem::from_j(double j) {
  const double twice = 2.0 * j;
  const double rounded = std::round(twice);
  if (!std::isfinite(j) || std::abs(twice - rounded) > 1e-12 || rounded < 1.0) {
    throw std::invalid_argument("j must be a positive half-integer, got " + std::to_string(j));
  }
  return SpinSystem(static_cast<int>(rounded));
}

bool SpinSystem::contains(double m) const noexcept {
  const double shifted = m + j();
  const double rounded = std::round(shifted);
  return std::isfinite(m) && std::abs(shifted - rounded) < 1e-9 && rounded >= 0.0 && rounded <= two_j_;
}

int SpinSystem::index_of(double m) const {
  if (!contains(m)) {
    throw std::out_of_range("m=" + std::to_string(m) + " is not a projection of j=" + std::to_string(j()));
  }
  return static_cast<int>(std::round(m + j()));
}

// ---------------------------------------------------------------------------
// Operator

namespace {

int band_width(Structure s) {
  switch (s) {
    case Structure::diagonal: return 0;
    case Structure::tridiagonal: return 1;
    case Structure::dense: break;
  }
  return -1;
}

Structure wider(Structure a, Structure b) { return band_width(a) < 0 || band_width(b) < 0 ? Structure::dense : (band_width(a) > band_width(b) ? a : b); }

}  // namespace

Operator Operator::classify(Matrix m, double tol) {
  const Eigen::Index n = m.rows();
  int width = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(m(r, c)) > tol) width = std::max<int>(width, static_cast<int>(std::abs(r - c)));
    }
  }
  const Structure s = width == 0 ? Structure::diagonal : (width == 1 ? Structure::tridiagonal : Structure::dense);
  return Operator(std::move(m), s);
}

Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim), Structure::diagonal); }

bool Operator::is_hermitian(double tol) const {
  return detail::max_abs(mat_ - mat_.adjoint()) <= tol;
}

bool Operator::is_unitary(double tol) const {
  return detail::max_abs(mat_.adjoint() * mat_ - Matrix::Identity(dim(), dim())) <= tol;
}

bool Operator::structure_consistent(double tol) const {
  const int width = band_width(structure_);
  if (width < 0) return true;
  for (Eigen::Index c = 0; c < mat_.cols(); ++c)
    for (Eigen::Index r = 0; r < mat_.rows(); ++r)
      if (std::abs(r - c) > width && std::abs(mat_(r, c)) > tol) return false;
  return true;
}

Operator Operator::adjoint() const { return Operator(mat_.adjoint(), structure_); }

Operator operator+(const Operator& a, const Operator& b) {
  return Operator(a.mat_ + b.mat_, wider(a.structure_, b.structure_));
}

Operator operator-(const Operator& a, const Operator& b) {
  return Operator(a.mat_ - b.mat_, wider(a.structure_, b.structure_));
}

Operator operator*(const Operator& a, const Operator& b) {
  // Band widths add under multiplication.
  const int wa = band_width(a.structure_);
  const int wb = band_width(b.structure_);
  Structure s = Structure::dense;
  if (wa >= 0 && wb >= 0) {
    if (wa + wb == 0) s = Structure::diagonal;
    else if (wa + wb == 1) s = Structure::tridiagonal;
  }
  return Operator(a.mat_ * b.mat_, s);
}

Operator operator*(cplx s, const Operator& a) { return Operator(s * a.mat_, a.structure_); }
Operator operator*(double s, const Operator& a) { return Operator(s * a.mat_, a.structure_); }

// ---------------------------------------------------------------------------
// Spin operators

double ladder(double j, double m) {
  const double v = j * (j + 1.0) - m * (m + 1.0);
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

SpinOperators build_spin_operators(const SpinSystem& sys) {
  const int n = sys.dim();
  Matrix jz = Matrix::Zero(n, n);
  Matrix jplus = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = sys.m_at(i);
    jz(i, i) = m;
    if (i + 1 < n) jplus(i + 1, i) = ladder(sys.j(), m);
  }
  Matrix jminus = jplus.adjoint();
  Matrix jx = 0.5 * (jplus + jminus);
  Matrix jy = (jplus - jminus) / cplx(0.0, 2.0);
  const Structure band = n > 1 ? Structure::tridiagonal : Structure::diagonal;
  return {Operator(std::move(jx), band), Operator(std::move(jy), band), Operator(std::move(jz), Structure::diagonal)};
}

Operator commutator(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("commutator: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
  return a * b - b * a;
}

// ---------------------------------------------------------------------------
// Exponentials

Matrix expm_series(const Matrix& m, cplx scale) {
  if (!detail::all_finite(m) || !std::isfinite(scale.real()) || !std::isfinite(scale.imag())) {
    throw std::domain_error("expm: non-finite entries");
  }
  const Eigen::Index n = m.rows();
  Matrix a = scale * m;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  a /= std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Matrix expm_hermitian(const Operator& m, cplx scale) {
  if (!detail::all_finite(m.matrix())) throw std::domain_error("expm: non-finite entries");
  const Matrix& h = m.matrix();
  const Eigen::Index n = h.rows();
  if (m.structure() == Structure::diagonal) {
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) out(i, i) = std::exp(scale * h(i, i).real());
    return out;
  }
  if (m.structure() == Structure::tridiagonal) {
    Eigen::VectorXd diag;
    Vector sub;
    detail::tridiagonal_bands(h, diag, sub);
    return detail::tridiagonal_spectrum(diag, sub).exp_matrix(scale);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver did not converge");
  Vector phases(n);
  for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::exp(scale * solver.eigenvalues()(k));
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

Operator expm(const Operator& m, cplx scale) {
  if (!detail::all_finite(m.matrix())) throw std::domain_error("expm: non-finite entries");
  const bool real_or_imag = scale.real() == 0.0 || scale.imag() == 0.0;
  const double herm_tol = 1e-12 * std::max(1.0, detail::max_abs(m.matrix()));
  if (real_or_imag && m.is_hermitian(herm_tol)) {
    const Structure s = m.structure() == Structure::diagonal ? Structure::diagonal : Structure::dense;
    return Operator(expm_hermitian(m, scale), s);
  }
  return Operator(expm_series(m.matrix(), scale), m.structure() == Structure::diagonal ? Structure::diagonal : Structure::dense);
}

Operator rotation_u(const SpinSystem& sys, double phi, double theta) {
  const auto ops = build_spin_operators(sys);
  return expm(ops.jz, cplx(0.0, -phi)) * expm(ops.jy, cplx(0.0, -theta));
}

// ---------------------------------------------------------------------------
// Rotor

Rotor::Rotor(const SpinSystem& sys) : sys_(sys), m_values_(sys.dim()) {
  for (int i = 0; i < sys.dim(); ++i) m_values_(i) = sys.m_at(i);
  const auto ops = build_spin_operators(sys);
  Eigen::VectorXd diag;
  Vector sub;
  detail::tridiagonal_bands(ops.jy.matrix(), diag, sub);
  const auto spec = detail::tridiagonal_spectrum(diag, sub);
  jy_eigenvalues_ = spec.values;
  jy_vectors_ = spec.gauge.asDiagonal() * spec.vectors.cast<cplx>();
}

Vector Rotor::exp_jy(double theta, const Vector& v) const {
  Vector c = jy_vectors_.adjoint() * v;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(cplx(0.0, -theta * jy_eigenvalues_(k)));
  return jy_vectors_ * c;
}

Vector Rotor::apply(double phi, double theta, const Vector& v) const {
  Vector w = exp_jy(theta, v);
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) *= std::exp(cplx(0.0, -phi * m_values_(k)));
  return w;
}

Vector Rotor::apply_adjoint(double phi, double theta, const Vector& v) const {
  Vector w = v;
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) *= std::exp(cplx(0.0, phi * m_values_(k)));
  return exp_jy(-theta, w);
}

Matrix Rotor::matrix(double phi, double theta) const {
  const int n = sys_.dim();
  Matrix out(n, n);
  for (int c = 0; c < n; ++c) out.col(c) = apply(phi, theta, Vector::Unit(n, c));
  return out;
}

// ---------------------------------------------------------------------------
// States

QuantumState::QuantumState(Vector amplitudes, double tol) : amps_(std::move(amplitudes)) {
  const double n2 = amps_.squaredNorm();
  if (!std::isfinite(n2) || std::abs(n2 - 1.0) > tol) {
    throw std::invalid_argument("state is not normalized: |psi|^2 = " + std::to_string(n2));
  }
}

QuantumState QuantumState::basis(const SpinSystem& sys, double m) {
  return QuantumState(Vector::Unit(sys.dim(), sys.index_of(m)));
}

QuantumState QuantumState::normalized(Vector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  return QuantumState(amplitudes / n);
}

double QuantumState::expectation(const Operator& op) const {
  if (op.dim() != dim()) throw std::invalid_argument("expectation: dimension mismatch");
  return amps_.dot(op.matrix() * amps_).real();
}

TwoModeFock fock_map(const SpinSystem& sys, double m) {
  const int index = sys.index_of(m);
  // index = j + m = n_a
  return {index, sys.two_j() - index};
}

}  // namespace holobec
