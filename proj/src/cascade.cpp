#include "homb/cascade.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "homb/krylov.hpp"

namespace homb {

namespace {

SpectralField constant_field(const CellGrid& g, const Vec3c& c) {
  return SpectralField::constant(g, c);
}

// Random band-limited test field with |k|_inf <= 2, deterministic per seed.
SpectralField random_test_field(const CellGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t N = g.num_nodes();
  std::vector<cplx> coeffs(3 * N, cplx(0));
  const int n = g.n();
  const int band = std::min(2, n / 2 - 1);
  for (int c = 0; c < 3; ++c)
    for (int k0 = -band; k0 <= band; ++k0)
      for (int k1 = -band; k1 <= band; ++k1)
        for (int k2 = -band; k2 <= band; ++k2) {
          const std::size_t m = g.node_index((k0 + n) % n, (k1 + n) % n, (k2 + n) % n);
          coeffs[c * N + m] = cplx(gauss(rng), gauss(rng));
        }
  return SpectralField::from_coeffs(g, std::move(coeffs));
}

}  // namespace

CascadeWorkspace::CascadeWorkspace(const ElasticityTensorField& A, const Vec3& chi,
                                   const SolverConfig& cfg)
    : A_(&A), chi_(chi), chi2_(chi.squaredNorm()) {
  if (chi2_ == 0.0) throw InvalidInput("cascade requires chi != 0");
  A.certificate();
  const CellGrid& g = A.grid();
  std::vector<StrainField> xc;
  xc.reserve(3);
  for (int q = 0; q < 3; ++q) {
    Vec3c eq = Vec3c::Zero();
    eq(q) = 1.0;
    xc.push_back(x_chi_apply(constant_field(g, eq), chi_));
  }
  w_.reserve(3);
  for (int q = 0; q < 3; ++q) {
    const CellRhs rhs{apply_pointwise(A, xc[q]) * cplx(0, -1), SpectralField::zero(g)};
    w_.push_back(solve_cell(A, rhs, cfg));
  }
  for (int q = 0; q < 3; ++q) {
    const StrainField flux = apply_pointwise(A, sym_gradient(w_[q]) + xc[q] * cplx(0, 1));
    for (int p = 0; p < 3; ++p) B_(p, q) = inner(flux, xc[p] * cplx(0, 1));
  }
  Eigen::SelfAdjointEigenSolver<Mat3c> es(0.5 * (B_ + B_.adjoint()) / chi2_,
                                          Eigen::EigenvaluesOnly);
  hom_eigs_ = {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
}

SpectralField CascadeWorkspace::u1_for(const Vec3c& u0) const {
  return w_[0] * u0(0) + w_[1] * u0(1) + w_[2] * u0(2);
}

Vec3c CascadeWorkspace::pin_u0(cplx z, const Vec3c& rhs) const {
  double dist = std::numeric_limits<double>::infinity();
  for (double lam : hom_eigs_) dist = std::min(dist, std::abs(z - cplx(lam)));
  if (dist < 1e-8)
    throw HomSingular("z within " + std::to_string(dist) + " of the fibered hom spectrum");
  const Mat3c M = B_ / chi2_ - z * Mat3c::Identity();
  return M.partialPivLu().solve(rhs);
}

const SpectralField& CascadeResult::term(int j, int k) const {
  if (k < 0 || k > n_cycles || j < 0 || j > 2) throw InvalidInput("term index out of range");
  const CycleTerms& c = cycles[k];
  return j == 0 ? c.u0_field : (j == 1 ? c.u1 : c.u2);
}

namespace {

// Assembles the u_2^{(k)} right-hand side
//   RHS(v) = -<A iX(u_1^{(k)} + u_2^{(k-1)}), sym grad v>
//            + <i (A sym grad(u_1^{(k)} + u_2^{(k-1)})) chi, v>
//            - <(A X_chi w~) chi, v> + z|chi|^2 <w~, v>  (+ |chi|^2 <f, v> at k=0)
// with w~ = u_0^{(k)} + u_1^{(k-1)} + u_2^{(k-2)}, and records the
// solvability residual |mean| relative to the functional scale.
CellRhs assemble_u2_rhs(const CascadeWorkspace& ws, const CascadeResult& st, int k,
                        double* rel_residual) {
  const CellGrid& g = ws.grid();
  const ElasticityTensorField& A = ws.coeff();
  const Vec3& chi = ws.chi();
  const cplx z = st.z;
  const double chi2 = ws.chi2();

  SpectralField p = st.cycles[k].u1;
  if (k >= 1) p = p + st.cycles[k - 1].u2;
  SpectralField wt = st.cycles[k].u0_field;
  if (k >= 1) wt = wt + st.cycles[k - 1].u1;
  if (k >= 2) wt = wt + st.cycles[k - 2].u2;

  const StrainField T = apply_pointwise(A, x_chi_apply(p, chi)) * cplx(0, -1);
  SpectralField gfield =
      x_chi_adjoint(apply_pointwise(A, sym_gradient(p)), chi) * cplx(0, 1) +
      x_chi_adjoint(apply_pointwise(A, x_chi_apply(wt, chi)), chi) * cplx(-1, 0) +
      wt * (z * chi2);
  if (k == 0) gfield = gfield + st.f_ref * cplx(chi2);

  const double scale = norm_l2(T) + norm_l2(gfield);
  *rel_residual = scale > 0.0 ? gfield.mean().norm() / scale : 0.0;
  (void)g;
  return CellRhs{T, gfield};
}

void finish_cycle(CascadeResult& st, const CascadeWorkspace& ws, int k, const SolverConfig& cfg) {
  double rel = 0.0;
  const CellRhs rhs = assemble_u2_rhs(ws, st, k, &rel);
  st.cycles[k].u2 = solve_cell(ws.coeff(), rhs, cfg);
  st.solvability_residuals.push_back(rel);
  const CycleTerms& c = st.cycles[k];
  st.term_norms.push_back(
      {norms(c.u0_field, ws.chi()), norms(c.u1, ws.chi()), norms(c.u2, ws.chi())});
  st.n_cycles = k;
}

}  // namespace

CascadeResult run_cycle0(const std::shared_ptr<const CascadeWorkspace>& ws, cplx z,
                         const SpectralField& f, const SolverConfig& cfg) {
  cfg.check();
  require_same_grid(ws->grid(), f.grid());
  CascadeResult st{ws->chi(), z, -1, {}, {}, {}, f, ws};
  const Vec3c u0 = ws->pin_u0(z, f.mean());
  st.cycles.push_back(CycleTerms{u0, constant_field(ws->grid(), u0), ws->u1_for(u0),
                                 SpectralField::zero(ws->grid())});
  finish_cycle(st, *ws, 0, cfg);
  return st;
}

CascadeResult run_cycle0(const ElasticityTensorField& A, const Vec3& chi, cplx z,
                         const SpectralField& f, const SolverConfig& cfg) {
  return run_cycle0(std::make_shared<CascadeWorkspace>(A, chi, cfg), z, f, cfg);
}

void run_cycle(int k, CascadeResult& state, const SolverConfig& cfg) {
  cfg.check();
  if (k < 1 || k != state.n_cycles + 1)
    throw InvalidInput("run_cycle expects the next cycle index (cycles 0..k-1 present)");
  const CascadeWorkspace& ws = *state.ws;
  const CellGrid& g = ws.grid();
  const ElasticityTensorField& A = ws.coeff();
  const Vec3& chi = ws.chi();

  // Pinning data: s = A(sym grad u_2^{(k-1)} + i X_chi(u_1^{(k-1)} + u_2^{(k-2)})),
  // rhs0 = (i/|chi|^2) mean(s chi).
  SpectralField q = state.cycles[k - 1].u1;
  if (k >= 2) q = q + state.cycles[k - 2].u2;
  const StrainField s = apply_pointwise(
      A, sym_gradient(state.cycles[k - 1].u2) + x_chi_apply(q, chi) * cplx(0, 1));
  const Vec3c rhs0 = cplx(0, 1) / ws.chi2() * x_chi_adjoint(s, chi).mean();

  const Vec3c u0 = ws.pin_u0(state.z, rhs0);
  state.cycles.push_back(
      CycleTerms{u0, constant_field(g, u0), ws.u1_for(u0), SpectralField::zero(g)});
  finish_cycle(state, ws, k, cfg);
}

CascadeResult run_cascade(const std::shared_ptr<const CascadeWorkspace>& ws, cplx z,
                          const SpectralField& f, int n_cycles, const SolverConfig& cfg) {
  if (n_cycles < 0) throw InvalidInput("n_cycles must be >= 0");
  CascadeResult st = run_cycle0(ws, z, f, cfg);
  for (int k = 1; k <= n_cycles; ++k) run_cycle(k, st, cfg);
  return st;
}

SpectralField residual_riesz(const CascadeResult& state) {
  if (state.n_cycles < 0) throw InvalidInput("cascade state is empty");
  const CascadeWorkspace& ws = *state.ws;
  const ElasticityTensorField& A = ws.coeff();
  const Vec3& chi = ws.chi();
  const CellGrid& g = ws.grid();
  const int n = state.n_cycles;
  const SpectralField u2_prev = n >= 1 ? state.cycles[n - 1].u2 : SpectralField::zero(g);
  const SpectralField& u1n = state.cycles[n].u1;
  const SpectralField& u2n = state.cycles[n].u2;

  // X_chi-tested strains: A iX(u_2^{(n-1)} + u_1^{(n)} + u_2^{(n)}) plus
  // A sym grad u_2^{(n)}; sym-grad-tested strain: A iX u_2^{(n)}.
  const StrainField t_x =
      apply_pointwise(A, x_chi_apply(u2_prev + u1n + u2n, chi) * cplx(0, 1) + sym_gradient(u2n));
  const StrainField t_g = apply_pointwise(A, x_chi_apply(u2n, chi) * cplx(0, 1));
  // -<t, iX v> contributes +i t.chi; -<t, sym grad v> contributes -adj(t).
  return x_chi_adjoint(t_x, chi) * cplx(0, 1) + sym_gradient_adjoint(t_g) * cplx(-1.0) +
         (u2_prev + u1n + u2n) * (state.z * ws.chi2());
}

cplx residual_functional(const CascadeResult& state, const SpectralField& v) {
  return inner(residual_riesz(state), v);
}

double verify_error_equation(const CascadeResult& state, const SpectralField& u_exact,
                             int trials) {
  if (trials < 1) throw InvalidInput("trials must be >= 1");
  const CascadeWorkspace& ws = *state.ws;
  const ElasticityTensorField& A = ws.coeff();
  const Vec3& chi = ws.chi();
  const double chi2 = ws.chi2();
  SpectralField u_err = u_exact;
  for (int k = 0; k <= state.n_cycles; ++k)
    u_err = u_err - (state.cycles[k].u0_field + state.cycles[k].u1 + state.cycles[k].u2);
  const StrainField flux_err = apply_pointwise(A, fiber_strain(u_err, chi));
  const SpectralField riesz = residual_riesz(state);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const SpectralField v = random_test_field(u_exact.grid(), 0x9e3779b97f4a7c15ull + t);
    const cplx aform = inner(flux_err, fiber_strain(v, chi)) / chi2;
    const cplx mass = state.z * inner(u_err, v);
    const cplx rhs = inner(riesz, v) / chi2;
    const double denom = std::abs(aform) + std::abs(mass) + std::abs(rhs) + 1e-300;
    worst = std::max(worst, std::abs(aform - mass - rhs) / denom);
  }
  return worst;
}

SpectralField sum_terms(const CascadeResult& state, const std::vector<std::pair<int, int>>& jk) {
  SpectralField acc = SpectralField::zero(state.f_ref.grid());
  for (const auto& [j, k] : jk) acc = acc + state.term(j, k);
  return acc;
}

PaperConstants paper_constants(double nu, double c_korn) {
  if (!(nu > 0.0)) throw InvalidInput("nu must be positive");
  if (!(c_korn >= 1.0)) throw InvalidInput("c_korn must be >= 1");
  PaperConstants pc{};
  const double ck2 = c_korn * c_korn;
  pc.C0 = std::max(3.0 / nu, 1.0);
  pc.C1 = std::max({3.0 * c_korn / (nu * nu * nu), c_korn / (nu * nu), 1.0});
  pc.C2 = std::max(4.0 * ck2 / (nu * nu) * pc.C1 +
                       6.0 * ck2 / nu * std::max(1.0, 1.0 / nu) * pc.C0,
                   1.0);
  pc.C = std::max({pc.C0, pc.C1, pc.C2});
  pc.C_error = 4.0 * std::max({6.0 + 2.0 / nu, 8.0 / nu, 1.0});
  return pc;
}

double measure_c_korn(const CellGrid& g) {
  const int n = g.n();
  double worst = 1.0;
  for (int t0 = 0; t0 < n; ++t0)
    for (int t1 = 0; t1 < n; ++t1)
      for (int t2 = 0; t2 < n; ++t2) {
        const Vec3 keff(double(g.deriv_wavenumber(t0)), double(g.deriv_wavenumber(t1)),
                        double(g.deriv_wavenumber(t2)));
        const double k2 = (2.0 * std::numbers::pi * keff).squaredNorm();
        if (k2 == 0.0) continue;
        // For a single mode, min_u ||sym grad u||^2 / |u|^2 = k2/2 (minimizer
        // orthogonal to the frequency), while ||u||_H1^2 = (1 + k2)|u|^2.
        worst = std::max(worst, std::sqrt((1.0 + k2) / (0.5 * k2)));
      }
  return worst;
}

}  // namespace homb
