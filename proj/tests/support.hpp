#pragma once

#include <random>

#include "holobec/spin.hpp"

namespace testing_support {

inline double max_entry(const holobec::Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Random Hermitian matrix with entries of magnitude <= scale.
inline holobec::Matrix random_hermitian(std::mt19937& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  holobec::Matrix a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = holobec::cplx(u(rng), u(rng));
  return 0.5 * (a + a.adjoint());
}

inline holobec::Matrix random_tridiagonal_hermitian(std::mt19937& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  holobec::Matrix a = holobec::Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) a(k, k) = u(rng);
  for (int k = 0; k + 1 < n; ++k) {
    a(k + 1, k) = holobec::cplx(u(rng), u(rng));
    a(k, k + 1) = std::conj(a(k + 1, k));
  }
  return a;
}

inline holobec::Vector random_state(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  holobec::Vector v(n);
  for (int k = 0; k < n; ++k) v(k) = holobec::cplx(g(rng), g(rng));
  return v.normalized();
}

}  // namespace testing_support
