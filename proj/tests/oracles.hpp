#pragma once

// Shared test oracles, independent of the library's own numerical paths:
// closed-form trigonometric calculus, dense operator assembly through
// canonical basis vectors, the textbook isotropic Navier symbol, and seeded
// random data generators.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "homb/coefficients.hpp"

namespace homb::test {

inline SpectralField random_field(const CellGrid& g, std::uint64_t seed, int band = 2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t N = g.num_nodes();
  std::vector<cplx> coeffs(3 * N, cplx(0.0, 0.0));
  const int cap = std::min(band, g.n() / 2 - 1);
  for (int c = 0; c < 3; ++c)
    for (int k0 = -cap; k0 <= cap; ++k0)
      for (int k1 = -cap; k1 <= cap; ++k1)
        for (int k2 = -cap; k2 <= cap; ++k2) {
          const int t0 = (k0 + g.n()) % g.n();
          const int t1 = (k1 + g.n()) % g.n();
          const int t2 = (k2 + g.n()) % g.n();
          coeffs[c * N + g.node_index(t0, t1, t2)] = cplx(gauss(rng), gauss(rng));
        }
  return SpectralField::from_coeffs(g, std::move(coeffs));
}

inline Vec3c random_vec3c(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3c v;
  for (int i = 0; i < 3; ++i) v[i] = cplx(gauss(rng), gauss(rng));
  return v;
}

inline Vec3 random_direction(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 v;
  do {
    for (int i = 0; i < 3; ++i) v[i] = gauss(rng);
  } while (v.norm() < 1e-3);
  return v / v.norm();
}

inline StrainField random_strain(const CellGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  StrainField s(g);
  for (std::size_t m = 0; m < g.num_nodes(); ++m)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) s.set_sym(i, j, m, cplx(gauss(rng), gauss(rng)));
  return s;
}

// u(y) = a exp(2 pi i k . y).
inline SpectralField mode_field(const CellGrid& g, const std::array<int, 3>& k, const Vec3c& a) {
  const std::size_t N = g.num_nodes();
  std::vector<cplx> coeffs(3 * N, cplx(0.0, 0.0));
  const int t0 = (k[0] + g.n()) % g.n();
  const int t1 = (k[1] + g.n()) % g.n();
  const int t2 = (k[2] + g.n()) % g.n();
  for (int c = 0; c < 3; ++c) coeffs[c * N + g.node_index(t0, t1, t2)] = a[c];
  return SpectralField::from_coeffs(g, std::move(coeffs));
}

// Hand-derived sym grad of mode_field: entries pi i (k_j a_i + k_i a_j)
// exp(2 pi i k . y), evaluated nodally.
inline StrainField mode_sym_gradient(const CellGrid& g, const std::array<int, 3>& k,
                                     const Vec3c& a) {
  constexpr double kPi = 3.1415926535897932384626433832795;
  StrainField s(g);
  for (std::size_t m = 0; m < g.num_nodes(); ++m) {
    const Vec3 y = g.node_coord(m);
    const double phase = 2.0 * kPi * (k[0] * y(0) + k[1] * y(1) + k[2] * y(2));
    const cplx e = cplx(std::cos(phase), std::sin(phase)) * cplx(0.0, kPi);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j)
        s.set_sym(i, j, m, e * (double(k[j]) * a[i] + double(k[i]) * a[j]));
  }
  return s;
}

inline Eigen::VectorXcd to_vec(const SpectralField& u) {
  return Eigen::Map<const Eigen::VectorXcd>(u.values().data(),
                                            static_cast<Eigen::Index>(u.values().size()));
}

inline SpectralField from_vec(const CellGrid& g, const Eigen::VectorXcd& v) {
  return SpectralField::from_values(g, std::vector<cplx>(v.data(), v.data() + v.size()));
}

// Dense 3N x 3N matrix of a linear map by exercising canonical nodal deltas;
// column layout matches to_vec (component-major).
inline Eigen::MatrixXcd dense_operator(
    const CellGrid& g, const std::function<SpectralField(const SpectralField&)>& op) {
  const std::size_t dim = 3 * g.num_nodes();
  Eigen::MatrixXcd M(dim, dim);
  std::vector<cplx> e(dim, cplx(0.0, 0.0));
  for (std::size_t col = 0; col < dim; ++col) {
    e[col] = cplx(1.0, 0.0);
    M.col(static_cast<Eigen::Index>(col)) = to_vec(op(SpectralField::from_values(g, e)));
    e[col] = cplx(0.0, 0.0);
  }
  return M;
}

// Textbook Navier symbol of the constant isotropic tensor:
// S(kappa) = mu |kappa|^2 I + (lambda + mu) kappa kappa^T.
inline Mat3 isotropic_symbol(double lambda, double mu, const Vec3& kappa) {
  return mu * kappa.squaredNorm() * Mat3::Identity() +
         (lambda + mu) * (kappa * kappa.transpose());
}

}  // namespace homb::test
