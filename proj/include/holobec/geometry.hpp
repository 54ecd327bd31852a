#pragma once

// Wilczek-Zee connections, curvature, Berry phases and holonomies over the
// (phi, theta) control plane of U(phi, theta) = exp(-i phi Jz) exp(-i theta Jy).
//
// Transport convention. A state c_k U(sigma)|k> that follows the eigenspace
// adiabatically obeys dc/ds = -A(s) c, so the holonomy of a loop is
//
//   Gamma = F_wind * P exp(-int A),   later segments multiplied on the left,
//
// where F_wind = <i|U^dag(start) U(end)|k> accounts for the frame mismatch
// exp(-2 pi i Jz) = (-1)^{2j} picked up when phi winds by 2 pi. This is the
// matrix an adiabatic simulation measures, and its Abelian phase is
// -2 pi m (1 - cos theta) for the loop phi: 0 -> 2 pi.

#include <functional>
#include <optional>
#include <vector>

#include "holobec/spin.hpp"

namespace holobec {

struct PhaseValue {
  double raw = 0.0;
  double wrapped = 0.0;  // in (-pi, pi]
};

/// Wraps to (-pi, pi].
double wrap_phase(double x);
/// Distance between two angles on the circle.
double phase_distance(double a, double b);
PhaseValue make_phase(double raw);

/// Levels of H0 sharing one energy, in ascending m.
class DegenerateSubspace {
 public:
  DegenerateSubspace(const SpinSystem& sys, std::vector<double> ms, double energy = 0.0);

  /// {m}
  static DegenerateSubspace single(const SpinSystem& sys, double m);
  /// {m, m+1}
  static DegenerateSubspace pair(const SpinSystem& sys, double m);
  /// Every level of alpha0 Jz + beta0 Jz^2 within tol of E_m.
  static DegenerateSubspace from_h0(const SpinSystem& sys, double alpha0, double beta0, double m, double tol = 1e-10);

  const std::vector<double>& ms() const noexcept { return ms_; }
  int size() const noexcept { return static_cast<int>(ms_.size()); }
  double energy() const noexcept { return energy_; }
  double lowest_m() const { return ms_.front(); }
  bool is_adjacent_pair() const;

 private:
  std::vector<double> ms_;
  double energy_;
};

struct ConnectionPair {
  Matrix a_phi;
  Matrix a_theta;
};

/// A connection evaluable anywhere on the control plane.
struct ConnectionField {
  int dim = 1;
  std::function<ConnectionPair(double phi, double theta)> eval;
  /// Frame factor for one full phi turn: exp(-2 pi i m) for this spin.
  cplx full_turn_factor{1.0, 0.0};
};

/// rho = sqrt((j - m)(j + m + 1)), the ladder element linking m and m + 1.
double rho(const SpinSystem& sys, double m);

/// Closed forms. Single level: A_phi = -i m cos(theta), A_theta = 0. Pair
/// {m, m+1}: A_phi = i[[-m cos, (rho/2) sin], [(rho/2) sin, -(m+1) cos]],
/// A_theta = (rho/2)[[0, 1], [-1, 0]]. Throws UnsupportedSubspace otherwise.
ConnectionPair connection_analytic(const SpinSystem& sys, const DegenerateSubspace& sub, double phi, double theta);

/// <i|U^dag dU/dsigma|j> by central differences of U. h must lie in [1e-6, 1e-3].
ConnectionPair connection_numeric(const SpinSystem& sys, const DegenerateSubspace& sub, double phi, double theta,
                                  double h = 1e-5);

ConnectionField analytic_connection(const SpinSystem& sys, const DegenerateSubspace& sub);
ConnectionField numeric_connection(const SpinSystem& sys, const DegenerateSubspace& sub, double h = 1e-5);

/// A' = V^dag A V for a constant unitary V.
ConnectionField gauge_transformed(const ConnectionField& field, const Matrix& v);

/// F = -d_phi A_theta + d_theta A_phi + [A_phi, A_theta], derivatives by
/// central differences with step h.
Matrix field_strength(const ConnectionField& field, double phi, double theta, double h = 1e-4);
Matrix field_strength(const SpinSystem& sys, const DegenerateSubspace& sub, double phi, double theta,
                      double h = 1e-4);

/// -2 pi m (1 - cos theta)
PhaseValue berry_phase_closed(double m, double theta);

/// i * integral of F over [0, 2 pi] x [0, theta]; Gauss-Legendre in theta,
/// periodic trapezoid in phi, steps nodes each. Throws if steps < 16.
PhaseValue berry_phase_flux(double m, double theta, int steps = 32);

struct ControlPoint {
  double phi = 0.0;
  double theta = 0.0;
};

/// Axis-aligned loop with sides traversed in order
/// (phi0,theta0) -> (phi1,theta0) -> (phi1,theta1) -> (phi0,theta1) -> back.
/// Reversed ranges reverse the orientation.
struct Rectangle {
  double phi0 = 0.0;
  double phi1 = 0.0;
  double theta0 = 0.0;
  double theta1 = 0.0;
};

/// The population-transfer rectangle: phi in [0, pi/(rho sin theta0)],
/// theta from theta0 to theta1.
Rectangle transfer_rectangle(const SpinSystem& sys, double m, double theta0, double theta1);

/// Discretized curve s -> (phi(s), theta(s)).
class LoopPath {
 public:
  /// Throws std::invalid_argument with fewer than 9 samples (K >= 8).
  explicit LoopPath(std::vector<ControlPoint> samples);

  /// phi from phi0 to phi0 + 2 pi * turns at fixed theta, K segments.
  static LoopPath circle_at_theta(double theta, int k, double phi0 = 0.0, int turns = 1);
  static LoopPath rectangle(const Rectangle& r, int k_per_side);
  /// Ellipse around a center, counterclockwise, K segments.
  static LoopPath ellipse(ControlPoint center, double phi_radius, double theta_radius, int k);

  const std::vector<ControlPoint>& samples() const noexcept { return samples_; }
  int segments() const noexcept { return static_cast<int>(samples_.size()) - 1; }
  /// theta returns exactly and phi returns modulo 2 pi.
  bool closed() const;
  /// Net number of 2 pi turns in phi (meaningful when closed()).
  int winding() const;
  /// Recovers the rectangle if the path is an axis-aligned one.
  std::optional<Rectangle> as_rectangle() const;

 private:
  std::vector<ControlPoint> samples_;
};

enum class HolonomyMethod { closed_form, path_ordered, stokes, adiabatic };

const char* to_string(HolonomyMethod m);

struct Holonomy {
  Matrix u;
  HolonomyMethod method = HolonomyMethod::path_ordered;

  bool is_unitary(double tol = 1e-8) const;
};

/// exp(X) for anti-Hermitian X, closed form for dimensions 1 and 2.
Matrix unitary_exp(const Matrix& anti_hermitian);

/// Ordered product of midpoint segment exponentials exp(-(A_phi dphi + A_theta dtheta)).
/// Throws OpenLoop when the path does not close.
Holonomy holonomy_path_ordered(const ConnectionField& field, const LoopPath& loop);

/// exp{-i (cos theta1 - cos theta0) [(m + 1/2) I + (rho / sin theta0) sigma_y]},
/// the large-rho holonomy of transfer_rectangle in the {m, m+1} basis.
/// Throws std::domain_error if sin(theta0) = 0.
Holonomy holonomy_closed_form(const SpinSystem& sys, double m, double theta0, double theta1);

struct StokesGrid {
  int n_phi = 256;
  int n_theta = 256;
};

/// Non-Abelian Stokes: Gamma = P_theta exp( int dtheta int dphi T^dag F T ),
/// with T the transport from the base corner up the phi0 edge and then along
/// phi. Midpoint rule in both directions.
Holonomy holonomy_stokes(const ConnectionField& field, const Rectangle& rect, const StokesGrid& grid,
                         double h = 1e-5);
/// Throws NonRectangularLoop unless the path is axis aligned.
Holonomy holonomy_stokes(const ConnectionField& field, const LoopPath& loop, const StokesGrid& grid,
                         double h = 1e-5);

double frobenius_distance(const Matrix& a, const Matrix& b);

}  // namespace holobec
