#include "holobec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include "holobec/errors.hpp"
#include "holobec/hamiltonian.hpp"
#include "linalg.hpp"

namespace holobec {

namespace {

constexpr double kPi = std::numbers::pi;

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

/// Curvature that generates the transport dc/ds = -A c around a small
/// counterclockwise plaquette: Gamma ~ I + F dphi dtheta with
/// F = -d_phi A_theta + d_theta A_phi - [A_phi, A_theta].
Matrix transport_curvature(const ConnectionField& field, double phi, double theta, double h) {
  const ConnectionPair c = field.eval(phi, theta);
  const Matrix dphi_atheta = (field.eval(phi + h, theta).a_theta - field.eval(phi - h, theta).a_theta) / (2.0 * h);
  const Matrix dtheta_aphi = (field.eval(phi, theta + h).a_phi - field.eval(phi, theta - h).a_phi) / (2.0 * h);
  return -dphi_atheta + dtheta_aphi - (c.a_phi * c.a_theta - c.a_theta * c.a_phi);
}

SpinSystem smallest_spin_containing(double m) {
  const double twice = 2.0 * std::abs(m);
  if (std::abs(twice - std::round(twice)) > 1e-12) throw std::invalid_argument("m must be a half-integer");
  if (twice < 0.5) return SpinSystem(2);
  return SpinSystem(static_cast<int>(std::round(twice)));
}

bool is_multiple_of_two_pi(double dphi) {
  const double turns = dphi / (2.0 * kPi);
  return std::abs(turns - std::round(turns)) <= 1e-12 * std::max(1.0, std::abs(turns));
}

}  // namespace

// ---------------------------------------------------------------------------
// Phases

double wrap_phase(double x) {
  double y = std::remainder(x, 2.0 * kPi);  // [-pi, pi]
  if (y <= -kPi) y += 2.0 * kPi;
  return y;
}

double phase_distance(double a, double b) { return std::abs(wrap_phase(a - b)); }

PhaseValue make_phase(double raw) { return {raw, wrap_phase(raw)}; }

// ---------------------------------------------------------------------------
// Subspaces

DegenerateSubspace::DegenerateSubspace(const SpinSystem& sys, std::vector<double> ms, double energy)
    : ms_(std::move(ms)), energy_(energy) {
  if (ms_.empty()) throw std::invalid_argument("degenerate subspace needs at least one level");
  std::sort(ms_.begin(), ms_.end());
  for (std::size_t i = 0; i < ms_.size(); ++i) {
    sys.index_of(ms_[i]);
    if (i > 0 && std::abs(ms_[i] - ms_[i - 1]) < 0.5) throw std::invalid_argument("repeated level in subspace");
  }
}

DegenerateSubspace DegenerateSubspace::single(const SpinSystem& sys, double m) { return DegenerateSubspace(sys, {m}); }

DegenerateSubspace DegenerateSubspace::pair(const SpinSystem& sys, double m) {
  return DegenerateSubspace(sys, {m, m + 1.0});
}

DegenerateSubspace DegenerateSubspace::from_h0(const SpinSystem& sys, double alpha0, double beta0, double m,
                                               double tol) {
  const Eigen::VectorXd e = h0_energies(sys, alpha0, beta0);
  const double target = e(sys.index_of(m));
  std::vector<double> ms;
  for (int i = 0; i < sys.dim(); ++i) {
    if (std::abs(e(i) - target) < tol) ms.push_back(sys.m_at(i));
  }
  return DegenerateSubspace(sys, std::move(ms), target);
}

bool DegenerateSubspace::is_adjacent_pair() const {
  return ms_.size() == 2 && std::abs(ms_[1] - ms_[0] - 1.0) < 1e-12;
}

// ---------------------------------------------------------------------------
// Connections

double rho(const SpinSystem& sys, double m) {
  const double j = sys.j();
  return std::sqrt(std::max(0.0, (j - m) * (j + m + 1.0)));
}

ConnectionPair connection_analytic(const SpinSystem& sys, const DegenerateSubspace& sub, double phi, double theta) {
  (void)phi;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  if (sub.size() == 1) {
    const double m = sub.lowest_m();
    sys.index_of(m);
    ConnectionPair out{Matrix::Constant(1, 1, cplx(0.0, -m * c)), Matrix::Zero(1, 1)};
    return out;
  }
  if (!sub.is_adjacent_pair()) {
    throw UnsupportedSubspace("closed-form connection covers a single level or the pair {m, m+1}; got " +
                              std::to_string(sub.size()) + " levels");
  }
  const double m = sub.lowest_m();
  sys.index_of(m + 1.0);
  const double r = rho(sys, m);
  ConnectionPair out{Matrix(2, 2), Matrix(2, 2)};
  out.a_phi << cplx(0.0, -m * c), cplx(0.0, 0.5 * r * s), cplx(0.0, 0.5 * r * s), cplx(0.0, -(m + 1.0) * c);
  out.a_theta << 0.0, 0.5 * r, -0.5 * r, 0.0;
  return out;
}

namespace {

ConnectionPair numeric_with_rotor(const Rotor& rotor, const std::vector<int>& idx, double phi, double theta, double h) {
  const int n = rotor.system().dim();
  const int k = static_cast<int>(idx.size());
  auto frame = [&](double p, double t) {
    Matrix cols(n, k);
    for (int c = 0; c < k; ++c) cols.col(c) = rotor.apply(p, t, Vector::Unit(n, idx[c]));
    return cols;
  };
  const Matrix base = frame(phi, theta);
  const Matrix dphi = (frame(phi + h, theta) - frame(phi - h, theta)) / (2.0 * h);
  const Matrix dtheta = (frame(phi, theta + h) - frame(phi, theta - h)) / (2.0 * h);
  return {base.adjoint() * dphi, base.adjoint() * dtheta};
}

std::vector<int> subspace_indices(const SpinSystem& sys, const DegenerateSubspace& sub) {
  std::vector<int> idx;
  for (double m : sub.ms()) idx.push_back(sys.index_of(m));
  return idx;
}

void check_step(double h) {
  if (!(h >= 1e-6 && h <= 1e-3)) throw std::invalid_argument("finite-difference step must lie in [1e-6, 1e-3]");
}

cplx full_turn(const SpinSystem& sys) { return sys.two_j() % 2 == 0 ? cplx(1.0, 0.0) : cplx(-1.0, 0.0); }

}  // namespace

ConnectionPair connection_numeric(const SpinSystem& sys, const DegenerateSubspace& sub, double phi, double theta,
                                  double h) {
  check_step(h);
  const Rotor rotor(sys);
  return numeric_with_rotor(rotor, subspace_indices(sys, sub), phi, theta, h);
}

ConnectionField analytic_connection(const SpinSystem& sys, const DegenerateSubspace& sub) {
  // Validate eagerly so misuse fails at construction.
  connection_analytic(sys, sub, 0.0, 0.0);
  return {sub.size(), [sys, sub](double phi, double theta) { return connection_analytic(sys, sub, phi, theta); },
          full_turn(sys)};
}

ConnectionField numeric_connection(const SpinSystem& sys, const DegenerateSubspace& sub, double h) {
  check_step(h);
  auto rotor = std::make_shared<const Rotor>(sys);
  auto idx = subspace_indices(sys, sub);
  return {sub.size(),
          [rotor, idx, h](double phi, double theta) { return numeric_with_rotor(*rotor, idx, phi, theta, h); },
          full_turn(sys)};
}

ConnectionField gauge_transformed(const ConnectionField& field, const Matrix& v) {
  if (v.rows() != field.dim || v.cols() != field.dim) throw std::invalid_argument("gauge matrix has wrong size");
  auto inner = field.eval;
  return {field.dim,
          [inner, v](double phi, double theta) {
            ConnectionPair c = inner(phi, theta);
            return ConnectionPair{v.adjoint() * c.a_phi * v, v.adjoint() * c.a_theta * v};
          },
          field.full_turn_factor};
}

Matrix field_strength(const ConnectionField& field, double phi, double theta, double h) {
  const ConnectionPair c = field.eval(phi, theta);
  const Matrix dphi_atheta = (field.eval(phi + h, theta).a_theta - field.eval(phi - h, theta).a_theta) / (2.0 * h);
  const Matrix dtheta_aphi = (field.eval(phi, theta + h).a_phi - field.eval(phi, theta - h).a_phi) / (2.0 * h);
  return -dphi_atheta + dtheta_aphi + (c.a_phi * c.a_theta - c.a_theta * c.a_phi);
}

Matrix field_strength(const SpinSystem& sys, const DegenerateSubspace& sub, double phi, double theta, double h) {
  return field_strength(analytic_connection(sys, sub), phi, theta, h);
}

// ---------------------------------------------------------------------------
// Abelian phases

PhaseValue berry_phase_closed(double m, double theta) { return make_phase(-2.0 * kPi * m * (1.0 - std::cos(theta))); }

PhaseValue berry_phase_flux(double m, double theta, int steps) {
  if (steps < 16) throw std::invalid_argument("berry_phase_flux needs at least 16 quadrature steps");
  const SpinSystem sys = smallest_spin_containing(m);
  const ConnectionField field = analytic_connection(sys, DegenerateSubspace::single(sys, m));
  std::vector<double> x, w;
  gauss_legendre(steps, x, w);
  const double dphi = 2.0 * kPi / steps;
  cplx flux = 0.0;
  for (int a = 0; a < steps; ++a) {
    const double phi = a * dphi;
    for (int b = 0; b < steps; ++b) {
      const double t = 0.5 * theta * (x[b] + 1.0);
      flux += field_strength(field, phi, t)(0, 0) * (0.5 * theta * w[b]) * dphi;
    }
  }
  return make_phase((kI * flux).real());
}

// ---------------------------------------------------------------------------
// Loops

Rectangle transfer_rectangle(const SpinSystem& sys, double m, double theta0, double theta1) {
  const double r = rho(sys, m);
  const double s = std::sin(theta0);
  if (r <= 0.0 || std::abs(s) < 1e-12) throw std::domain_error("transfer rectangle needs rho > 0 and sin(theta0) != 0");
  return {0.0, kPi / (r * s), theta0, theta1};
}

LoopPath::LoopPath(std::vector<ControlPoint> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 9) throw std::invalid_argument("loop needs at least 8 segments");
  for (const auto& p : samples_) {
    if (!std::isfinite(p.phi) || !std::isfinite(p.theta)) throw std::invalid_argument("loop sample is not finite");
  }
}

LoopPath LoopPath::circle_at_theta(double theta, int k, double phi0, int turns) {
  std::vector<ControlPoint> pts(k + 1);
  for (int i = 0; i <= k; ++i) pts[i] = {phi0 + 2.0 * kPi * turns * (static_cast<double>(i) / k), theta};
  return LoopPath(std::move(pts));
}

LoopPath LoopPath::rectangle(const Rectangle& r, int k_per_side) {
  const ControlPoint corners[5] = {{r.phi0, r.theta0}, {r.phi1, r.theta0}, {r.phi1, r.theta1}, {r.phi0, r.theta1},
                                   {r.phi0, r.theta0}};
  std::vector<ControlPoint> pts;
  pts.reserve(4 * k_per_side + 1);
  for (int side = 0; side < 4; ++side) {
    const ControlPoint a = corners[side];
    const ControlPoint b = corners[side + 1];
    for (int i = 0; i < k_per_side; ++i) {
      const double s = static_cast<double>(i) / k_per_side;
      // Keep the constant coordinate bit-exact along each side.
      pts.push_back({a.phi == b.phi ? a.phi : a.phi + s * (b.phi - a.phi),
                     a.theta == b.theta ? a.theta : a.theta + s * (b.theta - a.theta)});
    }
  }
  pts.push_back(corners[4]);
  return LoopPath(std::move(pts));
}

LoopPath LoopPath::ellipse(ControlPoint center, double phi_radius, double theta_radius, int k) {
  std::vector<ControlPoint> pts(k + 1);
  for (int i = 0; i < k; ++i) {
    const double t = 2.0 * kPi * i / k;
    pts[i] = {center.phi + phi_radius * std::cos(t), center.theta + theta_radius * std::sin(t)};
  }
  pts[k] = pts[0];
  return LoopPath(std::move(pts));
}

bool LoopPath::closed() const {
  const auto& a = samples_.front();
  const auto& b = samples_.back();
  return a.theta == b.theta && is_multiple_of_two_pi(b.phi - a.phi);
}

int LoopPath::winding() const {
  return static_cast<int>(std::lround((samples_.back().phi - samples_.front().phi) / (2.0 * kPi)));
}

std::optional<Rectangle> LoopPath::as_rectangle() const {
  if (!closed() || winding() != 0) return std::nullopt;
  struct Run {
    bool along_phi;
    int sign;
    ControlPoint start;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
    const double dp = samples_[i + 1].phi - samples_[i].phi;
    const double dt = samples_[i + 1].theta - samples_[i].theta;
    if (dp == 0.0 && dt == 0.0) continue;
    if (dp != 0.0 && dt != 0.0) return std::nullopt;
    const Run run{dp != 0.0, (dp != 0.0 ? dp : dt) > 0.0 ? 1 : -1, samples_[i]};
    if (runs.empty() || runs.back().along_phi != run.along_phi || runs.back().sign != run.sign) runs.push_back(run);
  }
  if (runs.size() != 4 || !runs[0].along_phi || runs[1].along_phi || !runs[2].along_phi || runs[3].along_phi) {
    return std::nullopt;
  }
  if (runs[0].sign == runs[2].sign || runs[1].sign == runs[3].sign) return std::nullopt;
  return Rectangle{runs[0].start.phi, runs[1].start.phi, runs[0].start.theta, runs[2].start.theta};
}

// ---------------------------------------------------------------------------
// Holonomies

const char* to_string(HolonomyMethod m) {
  switch (m) {
    case HolonomyMethod::closed_form: return "closed_form";
    case HolonomyMethod::path_ordered: return "path_ordered";
    case HolonomyMethod::stokes: return "stokes";
    case HolonomyMethod::adiabatic: return "adiabatic";
  }
  return "unknown";
}

bool Holonomy::is_unitary(double tol) const {
  return detail::max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) <= tol;
}

double frobenius_distance(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

Matrix unitary_exp(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n == 1) return Matrix::Constant(1, 1, std::exp(x(0, 0)));
  // x = i H with H Hermitian
  const Matrix h = -kI * x;
  if (n == 2) {
    const double a0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double az = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const double ax = h(1, 0).real();
    const double ay = h(1, 0).imag();
    const double r = std::sqrt(ax * ax + ay * ay + az * az);
    const double sinc = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
    Matrix traceless = h - a0 * Matrix::Identity(2, 2);
    return std::exp(cplx(0.0, a0)) * (std::cos(r) * Matrix::Identity(2, 2) + kI * sinc * traceless);
  }
  const Matrix herm = 0.5 * (h + h.adjoint());
  return expm_hermitian(Operator(herm, Structure::dense), kI);
}

Holonomy holonomy_path_ordered(const ConnectionField& field, const LoopPath& loop) {
  if (!loop.closed()) throw OpenLoop("path-ordered holonomy needs a closed loop");
  const auto& pts = loop.samples();
  Matrix gamma = Matrix::Identity(field.dim, field.dim);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double dphi = pts[i + 1].phi - pts[i].phi;
    const double dtheta = pts[i + 1].theta - pts[i].theta;
    const ConnectionPair a = field.eval(0.5 * (pts[i].phi + pts[i + 1].phi), 0.5 * (pts[i].theta + pts[i + 1].theta));
    gamma = unitary_exp(-(a.a_phi * dphi + a.a_theta * dtheta)) * gamma;
  }
  gamma *= std::pow(field.full_turn_factor, loop.winding());
  return {gamma, HolonomyMethod::path_ordered};
}

Holonomy holonomy_closed_form(const SpinSystem& sys, double m, double theta0, double theta1) {
  sys.index_of(m + 1.0);
  const double s0 = std::sin(theta0);
  if (std::abs(s0) < 1e-12) throw std::domain_error("closed-form holonomy needs sin(theta0) != 0");
  const double dc = std::cos(theta1) - std::cos(theta0);
  Matrix sigma_y(2, 2);
  sigma_y << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  const Matrix generator = (m + 0.5) * Matrix::Identity(2, 2) + (rho(sys, m) / s0) * sigma_y;
  return {unitary_exp(cplx(0.0, -dc) * generator), HolonomyMethod::closed_form};
}

Holonomy holonomy_stokes(const ConnectionField& field, const Rectangle& rect, const StokesGrid& grid, double h) {
  if (grid.n_phi < 1 || grid.n_theta < 1) throw std::invalid_argument("Stokes grid must be at least 1x1");
  const int n = field.dim;
  const Matrix id = Matrix::Identity(n, n);
  const double dphi = (rect.phi1 - rect.phi0) / grid.n_phi;
  const double dtheta = (rect.theta1 - rect.theta0) / grid.n_theta;
  if (dtheta == 0.0 || dphi == 0.0) return {id, HolonomyMethod::stokes};

  auto step = [&](double phi, double theta, double len_phi, double len_theta) {
    const ConnectionPair a = field.eval(phi, theta);
    return unitary_exp(-(a.a_phi * len_phi + a.a_theta * len_theta));
  };

  Matrix gamma = id;
  // Transport up the phi0 edge to the first strip midline.
  Matrix up = step(rect.phi0, rect.theta0 + 0.25 * dtheta, 0.0, 0.5 * dtheta);
  for (int k = 0; k < grid.n_theta; ++k) {
    const double theta = rect.theta0 + (k + 0.5) * dtheta;
    Matrix along = step(rect.phi0 + 0.25 * dphi, theta, 0.5 * dphi, 0.0);
    Matrix strip = Matrix::Zero(n, n);
    for (int i = 0; i < grid.n_phi; ++i) {
      const double phi = rect.phi0 + (i + 0.5) * dphi;
      if (i > 0) along = step(phi - 0.5 * dphi, theta, dphi, 0.0) * along;
      const Matrix t = along * up;
      strip += t.adjoint() * transport_curvature(field, phi, theta, h) * t;
    }
    gamma = unitary_exp(strip * (dphi * dtheta)) * gamma;
    if (k + 1 < grid.n_theta) up = step(rect.phi0, theta + 0.5 * dtheta, 0.0, dtheta) * up;
  }
  return {gamma, HolonomyMethod::stokes};
}

Holonomy holonomy_stokes(const ConnectionField& field, const LoopPath& loop, const StokesGrid& grid, double h) {
  const auto rect = loop.as_rectangle();
  if (!rect) throw NonRectangularLoop("Stokes evaluation needs an axis-aligned rectangular loop");
  return holonomy_stokes(field, *rect, grid, h);
}

}  // namespace holobec
