#include "homb/fiber_operator.hpp"

#include <cmath>

#include "homb/krylov.hpp"

namespace homb {

FiberOperator::FiberOperator(const ElasticityTensorField& A, const Vec3& chi)
    : A_(&A), chi_(chi) {
  A.certificate();  // must be validated
}

SpectralField FiberOperator::apply(const SpectralField& u) const {
  require_same_grid(grid(), u.grid());
  const StrainField s = apply_pointwise(*A_, fiber_strain(u, chi_));
  // (sym grad + i X_chi)^* s = sym_gradient_adjoint(s) - i x_chi_adjoint(s).
  return sym_gradient_adjoint(s) + x_chi_adjoint(s, chi_) * cplx(0, -1);
}

SpectralField FiberOperator::solve_resolvent(cplx z, const SpectralField& f,
                                             const SolverConfig& cfg) const {
  cfg.check();
  require_same_grid(grid(), f.grid());
  const double chi2 = chi_.squaredNorm();
  if (chi2 == 0.0) throw InvalidInput("solve_resolvent requires chi != 0");
  const OpFn op = [this, chi2, z](const SpectralField& u) {
    return apply(u) * (1.0 / chi2) - u * z;
  };
  OpFn precond = [](const SpectralField& r) { return r; };
  if (cfg.preconditioner == SolverConfig::Precond::constant_coefficient) {
    const auto abar = A_->mean_components();
    ModePrecond mp(grid(), chi_, /*zero_killed=*/false, [&](const Vec3& kappa) {
      return Mat3c((constant_symbol(abar, kappa) / chi2).cast<cplx>() - z * Mat3c::Identity());
    });
    precond = [mp = std::move(mp)](const SpectralField& r) { return mp(r); };
  }
  const bool hpd = (z.imag() == 0.0 && z.real() <= 0.0);
  return hpd ? pcg(op, precond, f, cfg.cg_tol, cfg.max_iter)
             : gmres(op, precond, f, cfg.cg_tol, cfg.max_iter);
}

SpectralField solve_cell(const ElasticityTensorField& A, const CellRhs& rhs,
                         const SolverConfig& cfg) {
  cfg.check();
  require_same_grid(A.grid(), rhs.strain.grid());
  require_same_grid(A.grid(), rhs.field.grid());
  const double scale = norm_l2(rhs.strain) + norm_l2(rhs.field);
  // RHS(e_i) = mean(field)_i: the strain term vanishes against constants.
  const double incompat = rhs.field.mean().norm();
  if (incompat > 1e-10 * scale)
    throw IncompatibleRHS("cell RHS does not annihilate constants: |mean| = " +
                          std::to_string(incompat));
  if (scale == 0.0) return SpectralField::zero(A.grid());
  // Riesz representative of the functional; killed modes are invisible to the
  // discrete form, so project them away (Galerkin restriction to the solve
  // space). Iterates then remain in the space automatically: the operator's
  // range avoids killed modes and the preconditioner zeroes them.
  const SpectralField b =
      project_cell_space(sym_gradient_adjoint(rhs.strain) + rhs.field);
  const OpFn op = [&A](const SpectralField& u) {
    return sym_gradient_adjoint(apply_pointwise(A, sym_gradient(u)));
  };
  OpFn precond = [](const SpectralField& r) { return r; };
  if (cfg.preconditioner == SolverConfig::Precond::constant_coefficient) {
    const auto abar = A.mean_components();
    ModePrecond mp(A.grid(), Vec3::Zero(), /*zero_killed=*/true, [&](const Vec3& kappa) {
      return Mat3c(constant_symbol(abar, kappa).cast<cplx>());
    });
    precond = [mp = std::move(mp)](const SpectralField& r) { return mp(r); };
  }
  return pcg(op, precond, b, cfg.cg_tol, cfg.max_iter);
}

double distance_to_spectrum(cplx z, const std::vector<double>& eigs) {
  if (eigs.empty()) throw EmptySpectrumList("distance_to_spectrum needs at least one eigenvalue");
  double d = std::numeric_limits<double>::infinity();
  for (double lam : eigs) d = std::min(d, std::abs(z - cplx(lam)));
  return d;
}

}  // namespace homb
