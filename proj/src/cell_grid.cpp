#include "homb/cell_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace homb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW plans per grid size. Planning is not thread-safe; execution through the
// new-array interface is. FFTW_ESTIMATE keeps planning deterministic and
// FFTW_UNALIGNED lets plans run on any buffer.
struct FftPlans {
  fftw_plan forward;
  fftw_plan backward;
};

const FftPlans& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, FftPlans> registry;
  std::scoped_lock lock(mu);
  auto it = registry.find(n);
  if (it != registry.end()) return it->second;
  const std::size_t N = static_cast<std::size_t>(n) * n * n;
  std::vector<cplx> a(N), b(N);
  auto* pa = reinterpret_cast<fftw_complex*>(a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(b.data());
  FftPlans p;
  p.forward = fftw_plan_dft_3d(n, n, n, pa, pb, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.backward = fftw_plan_dft_3d(n, n, n, pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  return registry.emplace(n, p).first->second;
}

// Forward transform of one component: coeffs = FFT(values)/N.
void dft_forward(int n, const cplx* in, cplx* out) {
  const auto& p = plans_for(n);
  fftw_execute_dft(p.forward, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const std::size_t N = static_cast<std::size_t>(n) * n * n;
  const double inv = 1.0 / double(N);
  for (std::size_t i = 0; i < N; ++i) out[i] *= inv;
}

// Inverse transform: values = sum_k coeffs[k] e^{2 pi i k.y}.
void dft_backward(int n, const cplx* in, cplx* out) {
  const auto& p = plans_for(n);
  fftw_execute_dft(p.backward, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

// Non-constant modes whose derivative wavenumber vanishes in every direction
// (all components 0 or the unbalanced Nyquist line n/2). The spectral
// derivative cannot see them, so admitting them would extend the cell-form
// kernel beyond the constants and hang flat spurious bands on the fiber
// operator; the field space excludes them. Each such harmonic is the
// checkerboard (-1)^{a t0 + b t1 + c t2}, so the nodal correction is cheap.
void drop_unresolved_modes(const CellGrid& g, cplx* coeffs, cplx* values) {
  const int n = g.n();
  const int h = n / 2;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= 1; ++c) {
        if (a + b + c == 0) continue;
        const std::size_t mode = g.node_index(a * h, b * h, c * h);
        const cplx coef = coeffs[mode];
        coeffs[mode] = cplx(0);
        if (values == nullptr || coef == cplx(0)) continue;
        std::size_t idx = 0;
        for (int t0 = 0; t0 < n; ++t0)
          for (int t1 = 0; t1 < n; ++t1)
            for (int t2 = 0; t2 < n; ++t2, ++idx) {
              const bool odd = ((a * t0 + b * t1 + c * t2) & 1) != 0;
              values[idx] -= odd ? -coef : coef;
            }
      }
}

}  // namespace

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

cplx pairwise_sum(std::span<const cplx> x) {
  if (x.size() <= 8) {
    cplx s = 0.0;
    for (cplx v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

CellGrid::CellGrid(int n_per_axis) : n_(n_per_axis) {
  if (n_ < 4 || n_ % 2 != 0) throw InvalidInput("n_per_axis must be even and >= 4");
}

SpectralField SpectralField::from_values(const CellGrid& g, std::vector<cplx> values) {
  if (values.size() != 3 * g.num_nodes()) throw InvalidInput("values size mismatch");
  SpectralField f(g, Rep::values);
  f.values_ = std::move(values);
  f.coeffs_.resize(f.values_.size());
  const std::size_t N = g.num_nodes();
  for (int c = 0; c < 3; ++c) {
    dft_forward(g.n(), f.values_.data() + c * N, f.coeffs_.data() + c * N);
    drop_unresolved_modes(g, f.coeffs_.data() + c * N, f.values_.data() + c * N);
  }
  return f;
}

SpectralField SpectralField::from_coeffs(const CellGrid& g, std::vector<cplx> coeffs) {
  if (coeffs.size() != 3 * g.num_nodes()) throw InvalidInput("coeffs size mismatch");
  SpectralField f(g, Rep::coeffs);
  f.coeffs_ = std::move(coeffs);
  f.values_.resize(f.coeffs_.size());
  const std::size_t N = g.num_nodes();
  for (int c = 0; c < 3; ++c) {
    drop_unresolved_modes(g, f.coeffs_.data() + c * N, nullptr);
    dft_backward(g.n(), f.coeffs_.data() + c * N, f.values_.data() + c * N);
  }
  return f;
}

SpectralField SpectralField::zero(const CellGrid& g) {
  SpectralField f(g, Rep::coeffs);
  f.coeffs_.assign(3 * g.num_nodes(), cplx(0));
  f.values_.assign(3 * g.num_nodes(), cplx(0));
  return f;
}

SpectralField SpectralField::constant(const CellGrid& g, const Vec3c& c) {
  SpectralField f(g, Rep::coeffs);
  const std::size_t N = g.num_nodes();
  f.coeffs_.assign(3 * N, cplx(0));
  f.values_.resize(3 * N);
  for (int comp = 0; comp < 3; ++comp) {
    f.coeffs_[comp * N] = c(comp);
    for (std::size_t m = 0; m < N; ++m) f.values_[comp * N + m] = c(comp);
  }
  return f;
}

Vec3c SpectralField::mean() const {
  const std::size_t N = grid_.num_nodes();
  return Vec3c(coeffs_[0], coeffs_[N], coeffs_[2 * N]);
}

SpectralField SpectralField::operator+(const SpectralField& o) const {
  require_same_grid(grid_, o.grid_);
  SpectralField f(grid_, rep_);
  const std::size_t sz = values_.size();
  f.values_.resize(sz);
  f.coeffs_.resize(sz);
  for (std::size_t i = 0; i < sz; ++i) {
    f.values_[i] = values_[i] + o.values_[i];
    f.coeffs_[i] = coeffs_[i] + o.coeffs_[i];
  }
  return f;
}

SpectralField SpectralField::operator-(const SpectralField& o) const {
  require_same_grid(grid_, o.grid_);
  SpectralField f(grid_, rep_);
  const std::size_t sz = values_.size();
  f.values_.resize(sz);
  f.coeffs_.resize(sz);
  for (std::size_t i = 0; i < sz; ++i) {
    f.values_[i] = values_[i] - o.values_[i];
    f.coeffs_[i] = coeffs_[i] - o.coeffs_[i];
  }
  return f;
}

SpectralField SpectralField::operator*(cplx a) const {
  SpectralField f(grid_, rep_);
  const std::size_t sz = values_.size();
  f.values_.resize(sz);
  f.coeffs_.resize(sz);
  for (std::size_t i = 0; i < sz; ++i) {
    f.values_[i] = values_[i] * a;
    f.coeffs_[i] = coeffs_[i] * a;
  }
  return f;
}

StrainField::StrainField(const CellGrid& g) : grid_(g), data_(9 * g.num_nodes(), cplx(0)) {}

StrainField StrainField::zero(const CellGrid& g) { return StrainField(g); }

StrainField StrainField::constant(const CellGrid& g, const Mat3c& s) {
  StrainField out(g);
  const std::size_t N = g.num_nodes();
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const cplx v = 0.5 * (s(i, j) + s(j, i));
      for (std::size_t m = 0; m < N; ++m) out.set_sym(i, j, m, v);
    }
  return out;
}

StrainField StrainField::operator+(const StrainField& o) const {
  require_same_grid(grid_, o.grid_);
  StrainField f(grid_);
  for (std::size_t i = 0; i < data_.size(); ++i) f.data_[i] = data_[i] + o.data_[i];
  return f;
}

StrainField StrainField::operator-(const StrainField& o) const {
  require_same_grid(grid_, o.grid_);
  StrainField f(grid_);
  for (std::size_t i = 0; i < data_.size(); ++i) f.data_[i] = data_[i] - o.data_[i];
  return f;
}

StrainField StrainField::operator*(cplx a) const {
  StrainField f(grid_);
  for (std::size_t i = 0; i < data_.size(); ++i) f.data_[i] = data_[i] * a;
  return f;
}

StrainField sym_gradient(const SpectralField& u) {
  const CellGrid& g = u.grid();
  const int n = g.n();
  const std::size_t N = g.num_nodes();
  StrainField out(g);
  // Spectral coefficients of the 6 unique strain components, then one inverse
  // transform per component.
  std::vector<cplx> comp(N);
  std::vector<cplx> vals(N);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      std::size_t idx = 0;
      for (int t0 = 0; t0 < n; ++t0) {
        const double k0 = kTwoPi * g.deriv_wavenumber(t0);
        for (int t1 = 0; t1 < n; ++t1) {
          const double k1 = kTwoPi * g.deriv_wavenumber(t1);
          for (int t2 = 0; t2 < n; ++t2, ++idx) {
            const double k2 = kTwoPi * g.deriv_wavenumber(t2);
            const double kk[3] = {k0, k1, k2};
            const cplx ui = u.coeff(i, idx);
            const cplx uj = u.coeff(j, idx);
            // sym grad of mode: (i/2)(k_j u_i + k_i u_j)
            comp[idx] = cplx(0, 0.5) * (kk[j] * ui + kk[i] * uj);
          }
        }
      }
      dft_backward(n, comp.data(), vals.data());
      for (std::size_t m = 0; m < N; ++m) out.set_sym(i, j, m, vals[m]);
    }
  }
  return out;
}

SpectralField sym_gradient_adjoint(const StrainField& s) {
  const CellGrid& g = s.grid();
  const int n = g.n();
  const std::size_t N = g.num_nodes();
  // Forward-transform the 6 unique components.
  std::array<std::vector<cplx>, 3> shat_diag;
  std::array<std::vector<cplx>, 3> shat_off;  // (1,2),(0,2),(0,1) stored as off[k] = s_{ij}, i<j, k = 3-i-j
  for (int i = 0; i < 3; ++i) {
    shat_diag[i].resize(N);
    dft_forward(n, s.data().data() + (3 * i + i) * N, shat_diag[i].data());
  }
  const int offi[3] = {1, 0, 0};
  const int offj[3] = {2, 2, 1};
  for (int o = 0; o < 3; ++o) {
    shat_off[o].resize(N);
    dft_forward(n, s.data().data() + (3 * offi[o] + offj[o]) * N, shat_off[o].data());
  }
  auto shat = [&](int i, int j, std::size_t m) -> cplx {
    if (i == j) return shat_diag[i][m];
    if (i > j) std::swap(i, j);
    const int o = (i == 1) ? 0 : (j == 2 ? 1 : 2);
    return shat_off[o][m];
  };
  std::vector<cplx> coeffs(3 * N);
  std::size_t idx = 0;
  for (int t0 = 0; t0 < n; ++t0) {
    const double k0 = kTwoPi * g.deriv_wavenumber(t0);
    for (int t1 = 0; t1 < n; ++t1) {
      const double k1 = kTwoPi * g.deriv_wavenumber(t1);
      for (int t2 = 0; t2 < n; ++t2, ++idx) {
        const double k2 = kTwoPi * g.deriv_wavenumber(t2);
        const double kk[3] = {k0, k1, k2};
        for (int i = 0; i < 3; ++i) {
          // (sym grad)^* s = -div s per mode: -i sum_j k_j s_ij
          cplx acc = 0;
          for (int j = 0; j < 3; ++j) acc += kk[j] * shat(i, j, idx);
          coeffs[i * N + idx] = cplx(0, -1) * acc;
        }
      }
    }
  }
  return SpectralField::from_coeffs(g, std::move(coeffs));
}

StrainField x_chi_apply(const SpectralField& u, const Vec3& chi) {
  const CellGrid& g = u.grid();
  const std::size_t N = g.num_nodes();
  StrainField out(g);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const cplx* ui = u.values().data() + i * N;
      const cplx* uj = u.values().data() + j * N;
      for (std::size_t m = 0; m < N; ++m)
        out.set_sym(i, j, m, 0.5 * (ui[m] * chi(j) + uj[m] * chi(i)));
    }
  return out;
}

SpectralField x_chi_adjoint(const StrainField& s, const Vec3& chi) {
  const CellGrid& g = s.grid();
  const std::size_t N = g.num_nodes();
  std::vector<cplx> vals(3 * N, cplx(0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const cplx* sij = s.data().data() + (3 * i + j) * N;
      cplx* vi = vals.data() + i * N;
      for (std::size_t m = 0; m < N; ++m) vi[m] += sij[m] * chi(j);
    }
  return SpectralField::from_values(g, std::move(vals));
}

StrainField fiber_strain(const SpectralField& u, const Vec3& chi) {
  StrainField e = sym_gradient(u);
  const std::size_t N = u.grid().num_nodes();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const cplx* ui = u.values().data() + i * N;
      const cplx* uj = u.values().data() + j * N;
      cplx* eij = e.data().data() + (3 * i + j) * N;
      for (std::size_t m = 0; m < N; ++m)
        eij[m] += cplx(0, 0.5) * (ui[m] * chi(j) + uj[m] * chi(i));
    }
  return e;
}

cplx inner(const SpectralField& u, const SpectralField& v) {
  require_same_grid(u.grid(), v.grid());
  const std::size_t sz = u.values().size();
  std::vector<cplx> prod(sz);
  for (std::size_t i = 0; i < sz; ++i) prod[i] = u.values()[i] * std::conj(v.values()[i]);
  return pairwise_sum(std::span<const cplx>(prod)) / double(u.grid().num_nodes());
}

double norm_l2(const SpectralField& u) {
  const std::size_t sz = u.values().size();
  std::vector<double> prod(sz);
  for (std::size_t i = 0; i < sz; ++i) prod[i] = std::norm(u.values()[i]);
  return std::sqrt(pairwise_sum(std::span<const double>(prod)) / double(u.grid().num_nodes()));
}

cplx inner(const StrainField& s, const StrainField& t) {
  require_same_grid(s.grid(), t.grid());
  const std::size_t sz = s.data().size();
  std::vector<cplx> prod(sz);
  for (std::size_t i = 0; i < sz; ++i) prod[i] = s.data()[i] * std::conj(t.data()[i]);
  return pairwise_sum(std::span<const cplx>(prod)) / double(s.grid().num_nodes());
}

double norm_l2(const StrainField& s) {
  const std::size_t sz = s.data().size();
  std::vector<double> prod(sz);
  for (std::size_t i = 0; i < sz; ++i) prod[i] = std::norm(s.data()[i]);
  return std::sqrt(pairwise_sum(std::span<const double>(prod)) / double(s.grid().num_nodes()));
}

double grad_norm(const SpectralField& u) {
  const CellGrid& g = u.grid();
  const int n = g.n();
  const std::size_t N = g.num_nodes();
  std::vector<double> acc(N, 0.0);
  std::size_t idx = 0;
  for (int t0 = 0; t0 < n; ++t0) {
    const double k0 = kTwoPi * g.deriv_wavenumber(t0);
    for (int t1 = 0; t1 < n; ++t1) {
      const double k1 = kTwoPi * g.deriv_wavenumber(t1);
      for (int t2 = 0; t2 < n; ++t2, ++idx) {
        const double k2 = kTwoPi * g.deriv_wavenumber(t2);
        const double k2sum = k0 * k0 + k1 * k1 + k2 * k2;
        double umag = 0.0;
        for (int c = 0; c < 3; ++c) umag += std::norm(u.coeff(c, idx));
        acc[idx] = k2sum * umag;
      }
    }
  }
  return std::sqrt(pairwise_sum(std::span<const double>(acc)));
}

double fiber_grad_norm(const SpectralField& u, const Vec3& chi) {
  const CellGrid& g = u.grid();
  const int n = g.n();
  const std::size_t N = g.num_nodes();
  std::vector<double> acc(N, 0.0);
  std::size_t idx = 0;
  for (int t0 = 0; t0 < n; ++t0) {
    const double k0 = kTwoPi * g.deriv_wavenumber(t0) + chi[0];
    for (int t1 = 0; t1 < n; ++t1) {
      const double k1 = kTwoPi * g.deriv_wavenumber(t1) + chi[1];
      for (int t2 = 0; t2 < n; ++t2, ++idx) {
        const double k2 = kTwoPi * g.deriv_wavenumber(t2) + chi[2];
        const double k2sum = k0 * k0 + k1 * k1 + k2 * k2;
        double umag = 0.0;
        for (int c = 0; c < 3; ++c) umag += std::norm(u.coeff(c, idx));
        acc[idx] = k2sum * umag;
      }
    }
  }
  return std::sqrt(pairwise_sum(std::span<const double>(acc)));
}

FieldNorms norms(const SpectralField& u, const Vec3& chi) {
  FieldNorms out{};
  out.l2 = norm_l2(u);
  const double gn = grad_norm(u);
  out.h1 = std::sqrt(out.l2 * out.l2 + gn * gn);
  out.fiber_h1 = norm_l2(fiber_strain(u, chi));
  return out;
}

}  // namespace homb
