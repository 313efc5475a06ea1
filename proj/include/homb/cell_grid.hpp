#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "homb/errors.hpp"

namespace homb {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec3c = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using Mat3c = Eigen::Matrix3cd;

// Deterministic pairwise (tree) summation. Used for every inner product and
// norm reduction in the library so that results do not depend on worker count
// or accumulation order.
double pairwise_sum(std::span<const double> x);
cplx pairwise_sum(std::span<const cplx> x);

// Uniform periodic grid on the unit cell Y = [0,1)^3 with n nodes per axis,
// y_m = m/n. Wavenumbers are k in {-n/2 .. n/2-1}^3; the derivative multiplier
// at the Nyquist wavenumber k_j = -n/2 is zero (symmetric convention,
// preserves realness of real fields).
class CellGrid {
 public:
  explicit CellGrid(int n_per_axis);

  int n() const { return n_; }
  std::size_t num_nodes() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  std::size_t node_index(int i0, int i1, int i2) const {
    return (static_cast<std::size_t>(i0) * n_ + i1) * n_ + i2;
  }
  Vec3 node_coord(std::size_t idx) const {
    const int i2 = static_cast<int>(idx % n_);
    const int i1 = static_cast<int>((idx / n_) % n_);
    const int i0 = static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_));
    return Vec3(double(i0) / n_, double(i1) / n_, double(i2) / n_);
  }

  // Signed wavenumber of FFT slot t along one axis (t in [0,n)).
  int wavenumber(int t) const { return t <= n_ / 2 - 1 ? t : t - n_; }
  // Wavenumber with the Nyquist slot mapped to zero: the multiplier used by
  // every discrete derivative.
  int deriv_wavenumber(int t) const { return t == n_ / 2 ? 0 : wavenumber(t); }

  // Derivative wavenumber triple (2*pi scaling NOT included) of a flat mode
  // index laid out like node_index.
  std::array<int, 3> mode_triple(std::size_t idx) const {
    const int t2 = static_cast<int>(idx % n_);
    const int t1 = static_cast<int>((idx / n_) % n_);
    const int t0 = static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_));
    return {t0, t1, t2};
  }

  bool operator==(const CellGrid& o) const { return n_ == o.n_; }

 private:
  int n_;
};

inline void require_same_grid(const CellGrid& a, const CellGrid& b) {
  if (!(a == b)) throw GridMismatch("fields live on different grids");
}

class StrainField;

// 3-component complex periodic field with synchronized nodal and spectral
// representations. Normalization: coeffs[k] are Fourier coefficients with
// values[m] = sum_k coeffs[k] exp(2 pi i k.y_m), so coeffs at k=0 is the mean
// and Parseval reads (1/N) sum_m |u_m|^2 = sum_k |u_k|^2. Immutable after
// construction; safe to share across workers.
//
// Construction projects away the seven non-constant modes whose derivative
// wavenumber vanishes in every direction (components on the unbalanced
// Nyquist line). Keeping them would extend the cell-form kernel beyond the
// constants and give the fiber operator flat spurious bands, so the field
// space excludes them; constructors are idempotent on fields already in the
// space, and every operator below maps the space into itself.
class SpectralField {
 public:
  enum class Rep { values, coeffs };

  static SpectralField from_values(const CellGrid& g, std::vector<cplx> values);
  static SpectralField from_coeffs(const CellGrid& g, std::vector<cplx> coeffs);
  static SpectralField zero(const CellGrid& g);
  static SpectralField constant(const CellGrid& g, const Vec3c& c);

  const CellGrid& grid() const { return grid_; }
  Rep primary_rep() const { return rep_; }

  // Layout: component-major, entry c*N + node (resp. c*N + mode).
  const std::vector<cplx>& values() const { return values_; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }

  cplx value(int c, std::size_t node) const { return values_[c * grid_.num_nodes() + node]; }
  cplx coeff(int c, std::size_t mode) const { return coeffs_[c * grid_.num_nodes() + mode]; }

  Vec3c mean() const;

  SpectralField operator+(const SpectralField& o) const;
  SpectralField operator-(const SpectralField& o) const;
  SpectralField operator*(cplx a) const;

 private:
  SpectralField(const CellGrid& g, Rep rep) : grid_(g), rep_(rep) {}
  CellGrid grid_;
  Rep rep_;
  std::vector<cplx> values_;
  std::vector<cplx> coeffs_;
};

// Complex symmetric 3x3 matrix per node, nodal representation only.
// values(i,j) equals values(j,i) exactly: all constructors write both slots
// from one source.
class StrainField {
 public:
  explicit StrainField(const CellGrid& g);
  static StrainField zero(const CellGrid& g);
  static StrainField constant(const CellGrid& g, const Mat3c& s);

  const CellGrid& grid() const { return grid_; }
  std::size_t num_nodes() const { return grid_.num_nodes(); }

  cplx value(int i, int j, std::size_t node) const {
    return data_[(static_cast<std::size_t>(3 * i + j)) * grid_.num_nodes() + node];
  }
  // Writes (i,j) and (j,i) together.
  void set_sym(int i, int j, std::size_t node, cplx v) {
    data_[(static_cast<std::size_t>(3 * i + j)) * grid_.num_nodes() + node] = v;
    data_[(static_cast<std::size_t>(3 * j + i)) * grid_.num_nodes() + node] = v;
  }

  const std::vector<cplx>& data() const { return data_; }
  std::vector<cplx>& data() { return data_; }

  StrainField operator+(const StrainField& o) const;
  StrainField operator-(const StrainField& o) const;
  StrainField operator*(cplx a) const;

 private:
  CellGrid grid_;
  std::vector<cplx> data_;  // layout (3i+j)*N + node
};

// sym(grad u) by 2 pi i k multipliers per mode; exact for trigonometric
// polynomials resolved by the grid.
StrainField sym_gradient(const SpectralField& u);

// L2(Y)-adjoint of sym_gradient: <sym grad u, s> = <u, sym_gradient_adjoint(s)>
// exactly (same zeroed-Nyquist multiplier set both ways).
SpectralField sym_gradient_adjoint(const StrainField& s);

// X_chi u = sym(u chi^T) nodewise.
StrainField x_chi_apply(const SpectralField& u, const Vec3& chi);

// Adjoint of X_chi on symmetric fields: s -> s.chi nodewise.
SpectralField x_chi_adjoint(const StrainField& s, const Vec3& chi);

// (sym grad + i X_chi) u, the fiber strain.
StrainField fiber_strain(const SpectralField& u, const Vec3& chi);

struct FieldNorms {
  double l2;        // ||u||_{L2(Y)}
  double h1;        // (l2^2 + ||grad u||^2)^{1/2}
  double fiber_h1;  // ||(sym grad + i X_chi) u||_{L2}
};
FieldNorms norms(const SpectralField& u, const Vec3& chi);

// L2(Y) inner products: <u,v> = integral of u . conj(v).
cplx inner(const SpectralField& u, const SpectralField& v);
double norm_l2(const SpectralField& u);
// Strain inner product: integral of s : conj(t).
cplx inner(const StrainField& s, const StrainField& t);
double norm_l2(const StrainField& s);

// ||grad u||_{L2}, Frobenius norm of the full (unsymmetrized) gradient.
double grad_norm(const SpectralField& u);

// ||grad u + i u chi^T||_{L2}: the Gelfand image of the scaled full-space
// gradient, per mode |2 pi k + chi| |u_k|.
double fiber_grad_norm(const SpectralField& u, const Vec3& chi);

}  // namespace homb
