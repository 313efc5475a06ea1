#pragma once

#include <vector>

#include "homb/cell_grid.hpp"
#include "homb/coefficients.hpp"

namespace homb {

struct SolverConfig {
  double cg_tol = 1e-10;  // relative residual
  int max_iter = 5000;
  enum class Precond { none, constant_coefficient };
  Precond preconditioner = Precond::constant_coefficient;

  void check() const {
    if (!(cg_tol > 0.0 && cg_tol <= 1e-4)) throw InvalidInput("cg_tol must be in (0, 1e-4]");
    if (max_iter < 1) throw InvalidInput("max_iter must be >= 1");
  }
};

// Matrix-free A_chi = (sym grad + i X_chi)^* A (sym grad + i X_chi) on
// L2(Y;C^3). Hermitian nonnegative; coercive against |chi|^2 ||u||^2 for
// chi != 0. Immutable, shareable across workers.
class FiberOperator {
 public:
  FiberOperator(const ElasticityTensorField& A, const Vec3& chi);

  const Vec3& chi() const { return chi_; }
  const ElasticityTensorField& coeff() const { return *A_; }
  const CellGrid& grid() const { return A_->grid(); }

  SpectralField apply(const SpectralField& u) const;

  // Solves (1/|chi|^2) A_chi u - z u = f to cfg.cg_tol relative residual.
  // Requires chi != 0. Real z <= 0 uses preconditioned CG (the shifted
  // operator is Hermitian positive definite); other shifts use full
  // right-preconditioned GMRES. The constant-coefficient preconditioner is the
  // node-mean tensor's symbol at the same shift, inverted exactly per mode.
  SpectralField solve_resolvent(cplx z, const SpectralField& f, const SolverConfig& cfg) const;

 private:
  const ElasticityTensorField* A_;
  Vec3 chi_;
};

// Right-hand-side functional of a cell problem, RHS(v) = <strain, sym grad v>
// + <field, v> in L2(Y).
struct CellRhs {
  StrainField strain;
  SpectralField field;
};

// Unique mean-zero solution of int_Y A sym grad u : sym grad conj(v) = RHS(v)
// for all periodic v. Pre: RHS annihilates constants, checked as
// |mean(field)| <= 1e-10 * (||strain|| + ||field||); throws IncompatibleRHS
// otherwise. The discrete solve runs CG on the cell solve space (modes with a
// nonvanishing derivative multiplier).
SpectralField solve_cell(const ElasticityTensorField& A, const CellRhs& rhs,
                         const SolverConfig& cfg);

// dist(z, spectrum) given the computed low eigenvalues of (1/|chi|^2) A_chi.
double distance_to_spectrum(cplx z, const std::vector<double>& eigs);

}  // namespace homb
