#pragma once

// Spin-j operator algebra in the |j,m> basis and its two-mode Fock reading.
//
// Basis convention used by every matrix in the library: index i holds
// |j, m = -j + i>, i.e. ascending m from -j to +j.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace holobec {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

/// Total spin j, stored as the integer 2j so half-integers are exact.
class SpinSystem {
 public:
  /// Throws std::invalid_argument unless two_j >= 1.
  explicit SpinSystem(int two_j);

  /// Accepts j in {1/2, 1, 3/2, ...}; throws otherwise.
  static SpinSystem from_j(double j);

  int two_j() const noexcept { return two_j_; }
  double j() const noexcept { return 0.5 * two_j_; }
  int dim() const noexcept { return two_j_ + 1; }

  double m_at(int index) const noexcept { return -j() + index; }
  /// Index of |j,m>; throws std::out_of_range if m is not a valid projection.
  int index_of(double m) const;
  bool contains(double m) const noexcept;

  bool operator==(const SpinSystem&) const = default;

 private:
  int two_j_;
};

enum class Structure { diagonal, tridiagonal, dense };

/// Square complex matrix tagged with its band structure.
class Operator {
 public:
  Operator() = default;
  Operator(Matrix m, Structure s) : mat_(std::move(m)), structure_(s) {}

  /// Tags the matrix with the narrowest structure its entries allow.
  static Operator classify(Matrix m, double tol = 0.0);
  static Operator identity(int dim);

  const Matrix& matrix() const noexcept { return mat_; }
  Structure structure() const noexcept { return structure_; }
  int dim() const noexcept { return static_cast<int>(mat_.rows()); }
  cplx operator()(int r, int c) const { return mat_(r, c); }

  bool is_hermitian(double tol = 1e-12) const;
  bool is_unitary(double tol = 1e-10) const;
  /// True when no entry outside the tagged band exceeds tol.
  bool structure_consistent(double tol = 0.0) const;

  Operator adjoint() const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(cplx s, const Operator& a);
  friend Operator operator*(double s, const Operator& a);

 private:
  Matrix mat_;
  Structure structure_ = Structure::dense;
};

struct SpinOperators {
  Operator jx;
  Operator jy;
  Operator jz;
};

SpinOperators build_spin_operators(const SpinSystem& sys);

/// Ladder coefficient <m+1|J+|m> = sqrt(j(j+1) - m(m+1)).
double ladder(double j, double m);

/// AB - BA. Throws std::invalid_argument on dimension mismatch.
Operator commutator(const Operator& a, const Operator& b);

/// exp(scale * M).
///
/// Uses an eigendecomposition whenever scale*M is a multiple of a Hermitian
/// operator (real or imaginary scale); tridiagonal and diagonal inputs take a
/// real-symmetric tridiagonal solver that stays cheap at large j. Anything
/// else falls back to scaling and squaring. Throws std::domain_error on
/// non-finite input.
Operator expm(const Operator& m, cplx scale);

/// Hermitian route: M must be Hermitian.
Matrix expm_hermitian(const Operator& m, cplx scale);
/// Scaling-and-squaring Taylor route; works for any square matrix.
Matrix expm_series(const Matrix& m, cplx scale);

/// exp(-i phi Jz) exp(-i theta Jy).
Operator rotation_u(const SpinSystem& sys, double phi, double theta);

/// Applies U(phi, theta) and its adjoint to vectors in O(dim^2) using a
/// cached eigendecomposition of Jy.
class Rotor {
 public:
  explicit Rotor(const SpinSystem& sys);

  Vector apply(double phi, double theta, const Vector& v) const;
  Vector apply_adjoint(double phi, double theta, const Vector& v) const;
  Matrix matrix(double phi, double theta) const;

  const SpinSystem& system() const noexcept { return sys_; }

 private:
  Vector exp_jy(double theta, const Vector& v) const;  // exp(-i theta Jy) v

  SpinSystem sys_;
  Eigen::VectorXd m_values_;
  Eigen::VectorXd jy_eigenvalues_;
  Matrix jy_vectors_;
};

/// Normalized state vector.
class QuantumState {
 public:
  /// Throws std::invalid_argument if |norm^2 - 1| exceeds tol.
  explicit QuantumState(Vector amplitudes, double tol = 1e-10);

  static QuantumState basis(const SpinSystem& sys, double m);
  /// Rescales to unit norm; throws on the zero vector.
  static QuantumState normalized(Vector amplitudes);

  const Vector& amplitudes() const noexcept { return amps_; }
  int dim() const noexcept { return static_cast<int>(amps_.size()); }

  cplx overlap(const QuantumState& other) const { return amps_.dot(other.amps_); }
  double expectation(const Operator& op) const;

 private:
  Vector amps_;
};

struct TwoModeFock {
  int n_a;
  int n_b;
  bool operator==(const TwoModeFock&) const = default;
};

/// |j,m> <-> |n_a = j+m> (x) |n_b = j-m>. Throws std::out_of_range on bad m.
TwoModeFock fock_map(const SpinSystem& sys, double m);

}  // namespace holobec
