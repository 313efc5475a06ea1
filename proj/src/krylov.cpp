#include "homb/krylov.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

namespace homb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string no_conv_msg(const char* what, int iters, double rel) {
  std::ostringstream os;
  os << what << " did not converge in " << iters << " iterations (relative residual " << rel << ")";
  return os.str();
}

}  // namespace

SpectralField pcg(const OpFn& op, const OpFn& precond, const SpectralField& b, double tol,
                  int max_iter, KrylovStats* stats) {
  const double bnorm = norm_l2(b);
  SpectralField x = SpectralField::zero(b.grid());
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }
  SpectralField r = b;
  SpectralField z = precond(r);
  SpectralField p = z;
  cplx rz = inner(r, z);
  double rel = norm_l2(r) / bnorm;
  int it = 0;
  while (rel > tol) {
    if (it >= max_iter) throw NoConvergence(no_conv_msg("pcg", it, rel));
    const SpectralField q = op(p);
    const cplx alpha = rz / inner(p, q);
    x = x + p * alpha;
    r = r - q * alpha;
    rel = norm_l2(r) / bnorm;
    if (rel <= tol) {
      ++it;
      break;
    }
    z = precond(r);
    const cplx rz_new = inner(r, z);
    const cplx beta = rz_new / rz;
    rz = rz_new;
    p = z + p * beta;
    ++it;
  }
  if (stats) *stats = {it, rel};
  return x;
}

SpectralField gmres(const OpFn& op, const OpFn& precond, const SpectralField& b, double tol,
                    int max_iter, KrylovStats* stats) {
  const double bnorm = norm_l2(b);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return SpectralField::zero(b.grid());
  }
  // Right preconditioning: solve op(precond(y)) = b, return precond(y).
  std::vector<SpectralField> V;
  V.push_back(b * (1.0 / bnorm));
  std::vector<std::vector<cplx>> H;  // H[j] holds column j, length j+2
  std::vector<cplx> cs, sn;          // Givens rotations
  std::vector<cplx> g = {cplx(bnorm)};
  double rel = 1.0;
  int j = 0;
  for (; j < max_iter && rel > tol; ++j) {
    SpectralField w = op(precond(V[j]));
    std::vector<cplx> h(j + 2, cplx(0));
    for (int i = 0; i <= j; ++i) {
      h[i] = inner(w, V[i]);
      w = w - V[i] * h[i];
    }
    const double wn = norm_l2(w);
    h[j + 1] = wn;
    if (wn > 0.0) V.push_back(w * (1.0 / wn));
    // Apply accumulated rotations to the new column, then form a new one.
    for (int i = 0; i < j; ++i) {
      const cplx t = std::conj(cs[i]) * h[i] + std::conj(sn[i]) * h[i + 1];
      h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
      h[i] = t;
    }
    const double denom = std::sqrt(std::norm(h[j]) + std::norm(h[j + 1]));
    cplx c = 1.0, s = 0.0;
    if (denom > 0.0) {
      c = h[j] / denom;
      s = h[j + 1] / denom;
    }
    cs.push_back(c);
    sn.push_back(s);
    h[j] = std::conj(c) * h[j] + std::conj(s) * h[j + 1];
    h[j + 1] = 0.0;
    g.push_back(-s * g[j]);
    g[j] = std::conj(c) * g[j];
    H.push_back(std::move(h));
    rel = std::abs(g[j + 1]) / bnorm;
    if (wn == 0.0) {
      ++j;  // column j was completed; exact-breakdown exit skips the for-increment
      break;
    }
  }
  const int cols = static_cast<int>(H.size());
  if (rel > tol) throw NoConvergence(no_conv_msg("gmres", cols, rel));
  // Back substitution for y, then x = precond(V y).
  std::vector<cplx> y(cols, cplx(0));
  for (int i = cols - 1; i >= 0; --i) {
    cplx acc = g[i];
    for (int k = i + 1; k < cols; ++k) acc -= H[k][i] * y[k];
    y[i] = acc / H[i][i];
  }
  SpectralField xk = SpectralField::zero(b.grid());
  for (int i = 0; i < cols; ++i) xk = xk + V[i] * y[i];
  if (stats) *stats = {cols, rel};
  return precond(xk);
}

Mat3 constant_symbol(const std::array<double, 81>& abar, const Vec3& kappa) {
  std::array<Mat3, 3> basis_strain;
  for (int q = 0; q < 3; ++q) {
    Mat3 s = Mat3::Zero();
    for (int j = 0; j < 3; ++j) {
      s(q, j) += 0.5 * kappa(j);
      s(j, q) += 0.5 * kappa(j);
    }
    basis_strain[q] = s;
  }
  Mat3 S;
  for (int q = 0; q < 3; ++q) {
    Mat3 As = Mat3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l)
            acc += abar[((i * 3 + j) * 3 + k) * 3 + l] * basis_strain[q](k, l);
        As(i, j) = acc;
      }
    for (int p = 0; p < 3; ++p) S(p, q) = (As.array() * basis_strain[p].array()).sum();
  }
  return S;
}

bool cell_killed_mode(const CellGrid& g, std::size_t mode) {
  const auto t = g.mode_triple(mode);
  return g.deriv_wavenumber(t[0]) == 0 && g.deriv_wavenumber(t[1]) == 0 &&
         g.deriv_wavenumber(t[2]) == 0;
}

SpectralField project_cell_space(const SpectralField& f) {
  const CellGrid& g = f.grid();
  const std::size_t N = g.num_nodes();
  std::vector<cplx> coeffs = f.coeffs();
  const int n = g.n();
  // Killed modes are the 8 corners t_j in {0, n/2}.
  for (int a : {0, n / 2})
    for (int b : {0, n / 2})
      for (int c : {0, n / 2}) {
        const std::size_t m = g.node_index(a, b, c);
        for (int comp = 0; comp < 3; ++comp) coeffs[comp * N + m] = 0.0;
      }
  return SpectralField::from_coeffs(g, std::move(coeffs));
}

ModePrecond::ModePrecond(const CellGrid& g, const Vec3& chi, bool zero_killed,
                         const std::function<Mat3c(const Vec3&)>& matrix)
    : grid_(g), inv_(g.num_nodes()) {
  const int n = g.n();
  std::size_t idx = 0;
  for (int t0 = 0; t0 < n; ++t0)
    for (int t1 = 0; t1 < n; ++t1)
      for (int t2 = 0; t2 < n; ++t2, ++idx) {
        const Vec3 keff(double(g.deriv_wavenumber(t0)), double(g.deriv_wavenumber(t1)),
                        double(g.deriv_wavenumber(t2)));
        if (zero_killed && keff.squaredNorm() == 0.0) {
          inv_[idx] = Mat3c::Zero();
          continue;
        }
        const Vec3 kappa = kTwoPi * keff + chi;
        inv_[idx] = matrix(kappa).inverse();
      }
}

SpectralField ModePrecond::operator()(const SpectralField& r) const {
  require_same_grid(grid_, r.grid());
  const std::size_t N = grid_.num_nodes();
  std::vector<cplx> coeffs(3 * N);
  for (std::size_t m = 0; m < N; ++m) {
    const Vec3c rm(r.coeff(0, m), r.coeff(1, m), r.coeff(2, m));
    const Vec3c out = inv_[m] * rm;
    coeffs[m] = out(0);
    coeffs[N + m] = out(1);
    coeffs[2 * N + m] = out(2);
  }
  return SpectralField::from_coeffs(grid_, std::move(coeffs));
}

}  // namespace homb
