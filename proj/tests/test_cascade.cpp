#include <doctest.h>

#include <memory>

#include "homb/cascade.hpp"
#include "oracles.hpp"

using namespace homb;

namespace {

std::shared_ptr<const CascadeWorkspace> make_ws(const ElasticityTensorField& A, const Vec3& chi,
                                                const SolverConfig& cfg) {
  return std::make_shared<CascadeWorkspace>(A, chi, cfg);
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = int(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log10(x[std::size_t(i)]), ly = std::log10(y[std::size_t(i)]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_SUITE("cascade") {
  TEST_CASE("workspace: correctors, fibered matrix, pinning") {
    const CellGrid g(8);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.5, {1, 0, 1});
    SolverConfig cfg;
    cfg.cg_tol = 1e-12;
    const Vec3 chi(0.4, -0.3, 0.6);
    const CascadeWorkspace ws(A, chi, cfg);

    // chi-corrector PDE: int A(sym grad w_q + i X e_q) : sym grad v = 0.
    for (int q = 0; q < 3; ++q) {
      const SpectralField& w = ws.chi_corrector(q);
      CHECK(w.mean().norm() <= 1e-12);
      Vec3c eq = Vec3c::Zero();
      eq(q) = 1.0;
      const StrainField flux = apply_pointwise(
          A, sym_gradient(w) + x_chi_apply(SpectralField::constant(g, eq), chi) * cplx(0, 1));
      CHECK(norm_l2(sym_gradient_adjoint(flux)) <= 1e-9);
    }

    // b_matrix equals the homogenized-tensor quadratic form.
    const HomogenizedTensor H = assemble_A_hom(A, CorrectorBasis::solve(A, cfg), cfg);
    const Mat3c Bh = a_chi_hom(H, chi);
    CHECK((ws.b_matrix() - Bh).cwiseAbs().maxCoeff() <= 1e-8 * Bh.cwiseAbs().maxCoeff());

    const auto eh = hom_eigen(chi, H);
    for (int i = 0; i < 3; ++i)
      CHECK(ws.hom_eigs()[i] ==
            doctest::Approx(eh[std::size_t(i)] / chi.squaredNorm()).epsilon(1e-7));

    // u1_for is the exact superposition of the three correctors.
    const Vec3c c = test::random_vec3c(9);
    const SpectralField u1 = ws.u1_for(c);
    const SpectralField want = ws.chi_corrector(0) * c(0) + ws.chi_corrector(1) * c(1) +
                               ws.chi_corrector(2) * c(2);
    CHECK(norm_l2(u1 - want) == 0.0);

    // pin_u0 solves the 3x3 system.
    const cplx z(-0.8, 0.3);
    const Vec3c rhs = test::random_vec3c(10);
    const Vec3c u0 = ws.pin_u0(z, rhs);
    const Vec3c resid = (ws.b_matrix() / chi.squaredNorm()) * u0 - z * u0 - rhs;
    CHECK(resid.norm() <= 1e-12 * rhs.norm());
    CHECK_THROWS_AS(ws.pin_u0(cplx(ws.hom_eigs()[0], 0.0), rhs), HomSingular);

    CHECK_THROWS_AS(CascadeWorkspace(A, Vec3::Zero(), cfg), InvalidInput);
  }

  TEST_CASE("cycle 0 matches the homogenized closed form") {
    const CellGrid g(8);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.4, {1, 1, 0});
    SolverConfig cfg;
    cfg.cg_tol = 1e-12;
    const Vec3 chi(0.25, 0.1, -0.15);
    const cplx z(-1.0, 0.0);
    const SpectralField f = test::random_field(g, 44, 2);
    const auto ws = make_ws(A, chi, cfg);
    const CascadeResult st = run_cycle0(ws, z, f, cfg);

    // u_0^{(0)} against an independently assembled homogenized matrix.
    const HomogenizedTensor H = assemble_A_hom(A, CorrectorBasis::solve(A, cfg), cfg);
    const Mat3c M = a_chi_hom(H, chi) / chi.squaredNorm() - z * Mat3c::Identity();
    const Vec3c u0_ind = M.partialPivLu().solve(Eigen::Vector3cd(f.mean()));
    CHECK((st.cycles[0].u0 - u0_ind).norm() <= 1e-8 * u0_ind.norm());
    CHECK((st.cycles[0].u0_field.mean() - st.cycles[0].u0).norm() <= 1e-13);

    // u_1^{(0)} PDE: int A(sym grad u_1 + i X u_0) : sym grad v = 0.
    const StrainField flux = apply_pointwise(
        A, sym_gradient(st.cycles[0].u1) + x_chi_apply(st.cycles[0].u0_field, chi) * cplx(0, 1));
    CHECK(norm_l2(sym_gradient_adjoint(flux)) <= 1e-8 * st.cycles[0].u0.norm());

    CHECK(st.n_cycles == 0);
    CHECK(st.cycles[0].u1.mean().norm() <= 1e-12);
    CHECK(st.cycles[0].u2.mean().norm() <= 1e-12);
    CHECK(st.solvability_residuals.size() == 1);
    CHECK(st.solvability_residuals[0] <= 1e-12);
  }

  TEST_CASE("solvability cancels to rounding through cycle 3") {
    const CellGrid g(8);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.5, {1, 0, 1});
    SolverConfig cfg;
    cfg.cg_tol = 1e-11;
    const Vec3 chi(0.12, -0.07, 0.18);
    const cplx z(-0.5, 0.4);
    const SpectralField f = test::random_field(g, 45, 2);
    const CascadeResult st = run_cascade(make_ws(A, chi, cfg), z, f, 3, cfg);

    CHECK(st.n_cycles == 3);
    CHECK(st.cycles.size() == 4);
    CHECK(st.term_norms.size() == 4);
    for (double r : st.solvability_residuals) CHECK(r <= 1e-10);

    // term() accessor addresses (j, k) correctly; sum_terms adds them.
    CHECK(&st.term(1, 2) == &st.cycles[2].u1);
    const SpectralField s = sum_terms(st, {{0, 0}, {1, 0}, {2, 1}});
    const SpectralField want = st.cycles[0].u0_field + st.cycles[0].u1 + st.cycles[1].u2;
    CHECK(norm_l2(s - want) == 0.0);
    CHECK_THROWS_AS(st.term(3, 0), InvalidInput);
    CHECK_THROWS_AS(st.term(0, 4), InvalidInput);
  }

  TEST_CASE("error equation holds against an iterative exact solve") {
    const CellGrid g(8);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.4, {0, 1, 1});
    SolverConfig cfg;
    cfg.cg_tol = 1e-12;
    const Vec3 chi(0.3, 0.05, -0.2);
    const cplx z(-0.6, 0.5);
    const SpectralField f = test::random_field(g, 46, 2);
    const FiberOperator op(A, chi);
    const SpectralField u_exact = op.solve_resolvent(z, f, cfg);

    const auto ws = make_ws(A, chi, cfg);
    CascadeResult st = run_cycle0(ws, z, f, cfg);
    CHECK(verify_error_equation(st, u_exact, 5) <= 1e-7);
    run_cycle(1, st, cfg);
    CHECK(verify_error_equation(st, u_exact, 5) <= 1e-7);
    run_cycle(2, st, cfg);
    CHECK(verify_error_equation(st, u_exact, 5) <= 1e-7);

    // Riesz representative reproduces the functional.
    const SpectralField v = test::random_field(g, 47, 2);
    const cplx direct = residual_functional(st, v);
    const cplx via_riesz = inner(residual_riesz(st), v);
    CHECK(std::abs(direct - via_riesz) <= 1e-12 * std::abs(direct));
  }

  TEST_CASE("cycle ordering is enforced") {
    const CellGrid g(4);
    const ElasticityTensorField A = ElasticityTensorField::isotropic_constant(g, 1.0, 1.0);
    SolverConfig cfg;
    const SpectralField f = test::random_field(g, 48, 1);
    CascadeResult st = run_cycle0(A, Vec3(0.2, 0, 0), cplx(-1.0, 0.0), f, cfg);
    CHECK_THROWS_AS(run_cycle(0, st, cfg), InvalidInput);
    CHECK_THROWS_AS(run_cycle(2, st, cfg), InvalidInput);
    CHECK_NOTHROW(run_cycle(1, st, cfg));
    CHECK_THROWS_AS(run_cascade(st.ws, cplx(-1.0, 0.0), f, -1, cfg), InvalidInput);
  }

  TEST_CASE("fiberwise truncation error decays at the expected order") {
    const CellGrid g(8);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.3, {1, 0, 0});
    SolverConfig cfg;
    cfg.cg_tol = 1e-12;
    const Vec3 dir = Vec3(1.0, 1.0, 0.0).normalized();
    const cplx z(-1.0, 0.0);
    const SpectralField f = test::random_field(g, 49, 2);

    const std::vector<double> radii = {0.25, 0.125, 0.0625, 0.03125};
    std::vector<std::vector<double>> err(3);  // [n][radius]
    for (double r : radii) {
      const Vec3 chi = r * dir;
      const FiberOperator op(A, chi);
      const SpectralField u_exact = op.solve_resolvent(z, f, cfg);
      CascadeResult st = run_cycle0(make_ws(A, chi, cfg), z, f, cfg);
      for (int n = 0; n <= 2; ++n) {
        if (n >= 1) run_cycle(n, st, cfg);
        SpectralField acc = SpectralField::zero(g);
        for (int k = 0; k <= n; ++k)
          acc = acc + st.cycles[k].u0_field + st.cycles[k].u1 + st.cycles[k].u2;
        err[std::size_t(n)].push_back(norms(u_exact - acc, chi).h1);
      }
    }
    for (int n = 0; n <= 2; ++n) {
      const double slope = fit_loglog_slope(radii, err[std::size_t(n)]);
      CHECK(slope >= n + 1 - 0.35);
      CHECK(slope <= n + 1 + 0.35);
      for (std::size_t i = 1; i < radii.size(); ++i)
        CHECK(err[std::size_t(n)][i] < err[std::size_t(n)][i - 1]);
    }
  }

  TEST_CASE("paper constants and discrete Korn constant") {
    const PaperConstants a = paper_constants(1.0, 1.0);
    CHECK(a.C0 == 3.0);
    CHECK(a.C1 == 3.0);
    CHECK(a.C2 == 30.0);
    CHECK(a.C == 30.0);
    CHECK(a.C_error == 32.0);

    const PaperConstants b = paper_constants(2.0, 1.0);
    CHECK(b.C0 == 1.5);
    CHECK(b.C1 == 1.0);
    CHECK(b.C2 == 5.5);
    CHECK(b.C == 5.5);
    CHECK(b.C_error == 28.0);

    CHECK_THROWS_AS(paper_constants(0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(paper_constants(1.0, 0.5), InvalidInput);

    // Worst Korn ratio is attained at the lowest resolved frequency and is
    // grid-independent: sqrt((1 + 4 pi^2) / (2 pi^2)).
    constexpr double kPi = 3.1415926535897932384626433832795;
    const double want = std::sqrt((1.0 + 4.0 * kPi * kPi) / (2.0 * kPi * kPi));
    CHECK(measure_c_korn(CellGrid(4)) == doctest::Approx(want).epsilon(1e-12));
    CHECK(measure_c_korn(CellGrid(8)) == doctest::Approx(want).epsilon(1e-12));
  }
}
