#include <doctest.h>

#include <memory>

#include "homb/spectral_fiber.hpp"
#include "oracles.hpp"

using namespace homb;

namespace {

std::vector<Vec3> small_sweep() {
  const double s2 = 1.0 / std::sqrt(2.0);
  std::vector<Vec3> out;
  for (const Vec3& d : {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(s2, s2, 0)})
    for (double r : {2.0, 0.8, 0.25}) out.push_back(r * d);
  return out;
}

}  // namespace

TEST_SUITE("spectral_fiber") {
  TEST_CASE("lowest eigenpairs agree with a dense eigensolver") {
    const CellGrid g(4);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.5, {1, 0, 0});
    const Vec3 chi(0.6, -0.4, 0.3);
    const FiberOperator op(A, chi);
    SolverConfig cfg;

    const Eigen::MatrixXcd M =
        test::dense_operator(g, [&](const SpectralField& u) { return op.apply(u); });
    // The L2 inner product carries weight 1/N relative to the nodal dot
    // product, so eigenvalues transfer directly.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (M + M.adjoint()));

    const FiberSpectrum spec = lowest_eigenpairs(op, 6, cfg);
    REQUIRE(spec.eigenvalues.size() == 6);
    // The nodal-delta basis also spans the modes the field space projects
    // away; the operator annihilates them, so the dense spectrum leads with
    // that exact kernel (3 components x 7 dropped modes) ahead of the fiber
    // eigenvalues.
    int kernel = 0;
    while (kernel < es.eigenvalues().size() && es.eigenvalues()(kernel) < 1e-10) ++kernel;
    REQUIRE(kernel == 21);
    for (int i = 0; i < 6; ++i) {
      CHECK(spec.eigenvalues[std::size_t(i)] ==
            doctest::Approx(es.eigenvalues()(kernel + i)).epsilon(1e-8));
      if (i) CHECK(spec.eigenvalues[std::size_t(i)] >= spec.eigenvalues[std::size_t(i - 1)]);
    }

    // Orthonormality, Rayleigh quotients, residual bookkeeping.
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j <= i; ++j) {
        const cplx ip = inner(spec.eigenvectors[std::size_t(i)], spec.eigenvectors[std::size_t(j)]);
        CHECK(std::abs(ip - (i == j ? cplx(1) : cplx(0))) <= 1e-9);
      }
      const SpectralField& w = spec.eigenvectors[std::size_t(i)];
      const SpectralField r = op.apply(w) - w * cplx(spec.eigenvalues[std::size_t(i)]);
      CHECK(norm_l2(r) <= 1e-8 * std::max(1.0, spec.eigenvalues[5]));
      CHECK(std::abs(norm_l2(r) - spec.residuals[std::size_t(i)]) <= 1e-9);
    }

    CHECK_THROWS_AS(lowest_eigenpairs(op, 9, cfg), InvalidInput);
    CHECK_THROWS_AS(lowest_eigenpairs(op, 0, cfg), InvalidInput);
    CHECK_THROWS_AS(lowest_eigenpairs(FiberOperator(A, Vec3::Zero()), 3, cfg), InvalidInput);
  }

  TEST_CASE("low projection is an orthogonal projection") {
    const CellGrid g(4);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.4, {0, 1, 0});
    const FiberOperator op(A, Vec3(0.5, 0.2, -0.3));
    SolverConfig cfg;
    const FiberSpectrum spec = lowest_eigenpairs(op, 4, cfg);

    const SpectralField u = test::random_field(g, 64, 1);
    const SpectralField pu = project_low(spec, u);
    const SpectralField ppu = project_low(spec, pu);
    CHECK(norm_l2(ppu - pu) <= 1e-10 * norm_l2(pu));
    CHECK(norm_l2(pu) <= norm_l2(u) * (1.0 + 1e-12));
    CHECK(norm_l2(project_low(spec, spec.eigenvectors[0]) - spec.eigenvectors[0]) <= 1e-9);

    const SpectralField v = test::random_field(g, 65, 1);
    const cplx a = inner(pu, v);
    const cplx b = inner(u, project_low(spec, v));
    CHECK(std::abs(a - b) <= 1e-11 * std::abs(a));
  }

  TEST_CASE("contour encloses the six low families and excludes lambda_4") {
    const CellGrid g(8);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.3, {1, 0, 0});
    SolverConfig cfg;
    const HomogenizedTensor H = assemble_A_hom(A, CorrectorBasis::solve(A, cfg), cfg);
    const Contour c = build_contour(A, H, small_sweep(), cfg, 32);

    CHECK(c.nodes.size() == 32);
    CHECK(c.weights.size() == 32);
    CHECK(c.mu > 0.0);
    CHECK(c.rho0_measured > 0.0);
    CHECK(c.center.imag() == 0.0);
    CHECK(c.center.real() - c.radius > 0.0);  // strictly right half plane
    CHECK(!c.sweep_data.empty());
    for (const BandPoint& b : c.sweep_data) {
      CHECK(b.chi.lpNorm<Eigen::Infinity>() <= c.mu + 1e-12);
      for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(cplx(b.lam_rescaled[std::size_t(i)]) - c.center) <
              c.radius - 0.5 * c.rho0_measured);
        CHECK(std::abs(cplx(b.hom_rescaled[std::size_t(i)]) - c.center) <
              c.radius - 0.5 * c.rho0_measured);
      }
      CHECK(std::abs(cplx(b.lam_rescaled[3]) - c.center) > c.radius + 0.5 * c.rho0_measured);
      CHECK(b.lam_rescaled[0] <= b.lam_rescaled[3]);
    }

    // Residue oracle: the quadrature rule integrates simple poles to the
    // indicator of the disk. Probe poles sit at conformal ratio <= 0.3 so the
    // trapezoid aliasing error (ratio^M) is far below the tolerance.
    for (double lam : {c.center.real(), c.center.real() + 0.3 * c.radius}) {
      cplx acc(0, 0);
      for (std::size_t m = 0; m < c.nodes.size(); ++m)
        acc += c.weights[m] / (lam - c.nodes[m]);
      CHECK(std::abs(acc - cplx(1)) <= 1e-10);
    }
    for (double lam :
         {c.center.real() + c.radius / 0.3, c.center.real() - c.radius / 0.3}) {
      cplx acc(0, 0);
      for (std::size_t m = 0; m < c.nodes.size(); ++m)
        acc += c.weights[m] / (lam - c.nodes[m]);
      CHECK(std::abs(acc) <= 1e-10);
    }

    CHECK_THROWS_AS(build_contour(A, H, small_sweep(), cfg, 4), InvalidInput);
  }

  TEST_CASE("g_eval closed form") {
    const Vec3 chi(0.3, 0.0, -0.4);
    const double eps = 0.1;
    const cplx z(2.0, -1.5);
    const cplx want = 1.0 / (chi.squaredNorm() * z / (eps * eps) + 1.0);
    CHECK(std::abs(g_eval(eps, chi, z) - want) <= 1e-15 * std::abs(want));
    CHECK(std::abs(g_eval(1.0, Vec3::Zero(), z) - cplx(1.0)) <= 1e-15);
  }

  TEST_CASE("windowed resolvent: eigen route equals quadrature route") {
    const CellGrid g(8);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.3, {1, 0, 0});
    SolverConfig cfg;
    const HomogenizedTensor H = assemble_A_hom(A, CorrectorBasis::solve(A, cfg), cfg);
    const Contour c = build_contour(A, H, small_sweep(), cfg, 64);

    const Vec3 chi(0.4, 0.2, 0.0);
    const double eps = 2.0 * chi.norm();
    const FiberOperator op(A, chi);
    const FiberSpectrum spec = lowest_eigenpairs(op, 4, cfg);
    const SpectralField f_low = project_low(spec, test::random_field(g, 81, 2));

    const SpectralField via_eigen = windowed_resolvent(spec, eps, f_low);
    const SpectralField via_contour = contour_windowed_resolvent(op, eps, f_low, c, cfg);
    CHECK(norm_l2(via_contour - via_eigen) <= 1e-8 * norm_l2(via_eigen));

    // Eigen route in closed form: gains 1/(lambda_i/eps^2 + 1).
    SpectralField want = SpectralField::zero(g);
    for (int i = 0; i < 3; ++i) {
      const cplx gain = 1.0 / (spec.eigenvalues[std::size_t(i)] / (eps * eps) + 1.0);
      want = want + spec.eigenvectors[std::size_t(i)] *
                        (gain * inner(f_low, spec.eigenvectors[std::size_t(i)]));
    }
    CHECK(norm_l2(via_eigen - want) <= 1e-10 * norm_l2(want));
  }

  TEST_CASE("constant coefficients: contour table has closed-form cycle 0") {
    const CellGrid g(8);
    const ElasticityTensorField A = ElasticityTensorField::isotropic_constant(g, 0.2, 1.0);
    SolverConfig cfg;
    cfg.cg_tol = 1e-12;
    const HomogenizedTensor H = assemble_A_hom(A, CorrectorBasis::solve(A, cfg), cfg);
    const Contour c = build_contour(A, H, small_sweep(), cfg, 64);

    const Vec3 chi(0.5, -0.3, 0.2);
    const double eps = 2.0 * chi.norm();
    const SpectralField f = test::random_field(g, 90, 2);
    const auto ws = std::make_shared<CascadeWorkspace>(A, chi, cfg);
    const auto table = rescaled_corrector_table(ws, eps, f, c, 1, cfg);
    REQUIRE(table.size() == 2);

    // R_0^{(0)} f = g(B/|chi|^2) mean(f) by spectral calculus of the 3x3
    // homogenized block.
    Eigen::SelfAdjointEigenSolver<Mat3c> es(ws->b_matrix() / chi.squaredNorm());
    Vec3c want = Vec3c::Zero();
    const Vec3c mf = f.mean();
    for (int i = 0; i < 3; ++i) {
      const cplx gain = g_eval(eps, chi, cplx(es.eigenvalues()(i), 0.0));
      const Vec3c v = es.eigenvectors().col(i);
      want += gain * v * (v.adjoint() * mf)(0, 0);
    }
    const Vec3c got = table[0][0].mean();
    CHECK((got - want).norm() <= 1e-9 * want.norm());
    // R_0^{(0)} f is constant in y.
    CHECK(norm_l2(table[0][0] - SpectralField::constant(g, got)) <= 1e-10 * want.norm());

    // With constant coefficients the chi-correctors vanish, so u_1^{(k)} = 0,
    // and the cycle-0 u_2 is z-independent: its g-weighted contour integral
    // vanishes (g is analytic inside).
    CHECK(norm_l2(table[0][1]) <= 1e-9 * norm_l2(f));
    CHECK(norm_l2(table[0][2]) <= 1e-9 * norm_l2(f));
  }

  TEST_CASE("quadrature node count is converged at 64") {
    const CellGrid g(8);
    const ElasticityTensorField A = ElasticityTensorField::isotropic_constant(g, 0.2, 1.0);
    SolverConfig cfg;
    cfg.cg_tol = 1e-12;
    const HomogenizedTensor H = assemble_A_hom(A, CorrectorBasis::solve(A, cfg), cfg);
    const Contour c64 = build_contour(A, H, small_sweep(), cfg, 64);
    const Contour c128 = build_contour(A, H, small_sweep(), cfg, 128);

    const Vec3 chi(0.45, 0.1, -0.25);
    const double eps = 2.0 * chi.norm();
    const FiberOperator op(A, chi);
    const FiberSpectrum spec = lowest_eigenpairs(op, 4, cfg);
    const SpectralField f_low = project_low(spec, test::random_field(g, 91, 2));
    const SpectralField a = contour_windowed_resolvent(op, eps, f_low, c64, cfg);
    const SpectralField b = contour_windowed_resolvent(op, eps, f_low, c128, cfg);
    CHECK(norm_l2(a - b) <= 1e-9 * norm_l2(a));
  }

  TEST_CASE("box rule of the single-corrector entry point") {
    const CellGrid g(8);
    const ElasticityTensorField A =
        ElasticityTensorField::isotropic_modulated(g, 1.0, 1.0, 0.3, {1, 0, 0});
    SolverConfig cfg;
    cfg.cg_tol = 1e-11;
    const HomogenizedTensor H = assemble_A_hom(A, CorrectorBasis::solve(A, cfg), cfg);
    const Contour c = build_contour(A, H, small_sweep(), cfg, 32);
    const SpectralField f = test::random_field(g, 92, 2);
    const double eps = 0.5;

    CHECK(norm_l2(rescaled_corrector_apply(A, 0, 0, Vec3::Zero(), eps, f, c, cfg)) == 0.0);
    const Vec3 outside(c.mu * 1.5, 0.0, 0.0);
    CHECK(norm_l2(rescaled_corrector_apply(A, 1, 0, outside, eps, f, c, cfg)) == 0.0);

    const Vec3 chi(0.8 * c.mu, 0.1, 0.0);
    const auto ws = std::make_shared<CascadeWorkspace>(A, chi, cfg);
    const auto table = rescaled_corrector_table(ws, eps, f, c, 1, cfg);
    for (int j = 0; j < 3; ++j) {
      const SpectralField direct = rescaled_corrector_apply(A, j, 1, chi, eps, f, c, cfg);
      CHECK(norm_l2(direct - table[1][std::size_t(j)]) <= 1e-9 * (norm_l2(f) + norm_l2(direct)));
    }
    CHECK_THROWS_AS(rescaled_corrector_apply(A, 3, 0, chi, eps, f, c, cfg), InvalidInput);
  }
}
