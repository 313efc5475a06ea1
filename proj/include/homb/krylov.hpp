#pragma once

#include <array>
#include <functional>
#include <vector>

#include "homb/cell_grid.hpp"

namespace homb {

using OpFn = std::function<SpectralField(const SpectralField&)>;

struct KrylovStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Preconditioned conjugate gradients for Hermitian positive definite
// operators. Relative residual ||b - op x|| <= tol ||b||. Throws NoConvergence
// at the iteration cap.
SpectralField pcg(const OpFn& op, const OpFn& precond, const SpectralField& b, double tol,
                  int max_iter, KrylovStats* stats = nullptr);

// Full (non-restarted) right-preconditioned GMRES with modified Gram-Schmidt,
// for complex-shifted operators. Same contract as pcg.
SpectralField gmres(const OpFn& op, const OpFn& precond, const SpectralField& b, double tol,
                    int max_iter, KrylovStats* stats = nullptr);

// Symbol of the constant-coefficient operator with tensor components abar at
// frequency kappa: S(kappa)_pq = (Abar sym(e_q kappa^T)) : sym(e_p kappa^T).
// Real symmetric, positive semidefinite, definite for kappa != 0.
Mat3 constant_symbol(const std::array<double, 81>& abar, const Vec3& kappa);

// A mode is "cell-killed" when all three derivative wavenumbers vanish (the
// zero mode plus the Nyquist corners): the discrete sym-gradient annihilates
// it, so the pure cell operator is singular there and the cell solve space
// excludes these modes.
bool cell_killed_mode(const CellGrid& g, std::size_t mode);

// Zero the coefficients of all cell-killed modes (projection onto the cell
// solve space).
SpectralField project_cell_space(const SpectralField& f);

// Per-mode block-diagonal preconditioner: multiplies the coefficient at each
// mode by a precomputed 3x3 inverse. matrix(kappa) receives
// kappa = 2 pi k_eff + chi and must be invertible wherever it is consulted;
// cell-killed modes get multiplier zero when zero_killed is set.
class ModePrecond {
 public:
  ModePrecond(const CellGrid& g, const Vec3& chi, bool zero_killed,
              const std::function<Mat3c(const Vec3&)>& matrix);
  SpectralField operator()(const SpectralField& r) const;

 private:
  CellGrid grid_;
  std::vector<Mat3c> inv_;
};

}  // namespace homb
