#pragma once

#include <array>
#include <memory>
#include <vector>

#include "homb/cascade.hpp"
#include "homb/fiber_operator.hpp"
#include "homb/homogenize.hpp"

namespace homb {

struct FiberSpectrum {
  Vec3 chi;
  std::vector<double> eigenvalues;         // ascending
  std::vector<SpectralField> eigenvectors;  // orthonormal in L2(Y)
  std::vector<double> residuals;            // ||A_chi w - lambda w||
};

// m lowest eigenpairs of A_chi (not rescaled) via LOBPCG: block size 6,
// locking from the bottom of the spectrum, per-mode constant-coefficient
// preconditioner, Rayleigh-Ritz over [X, W, P]. Convergence per pair at
// residual <= 1e-11 * (largest Ritz value in the working block). m <= 8.
FiberSpectrum lowest_eigenpairs(const FiberOperator& op, int m, const SolverConfig& cfg);

// P_chi u = sum_{i<3} <u, w_i> w_i.
SpectralField project_low(const FiberSpectrum& spec, const SpectralField& u);

struct BandPoint {
  Vec3 chi;
  std::array<double, 4> lam_rescaled;  // lambda_i^chi / |chi|^2, i = 1..4
  std::array<double, 3> hom_rescaled;  // lambda_i^{hom,chi} / |chi|^2
};

// Circular contour around the six rescaled low eigenvalue families, with
// trapezoidal quadrature: -(1/2 pi i) \oint f dz ~ sum_m weights[m] f(nodes[m]).
struct Contour {
  cplx center;       // on the positive real axis
  double radius;
  double mu;         // chosen box half-width: the contour certifies |chi|_inf <= mu
  double rho0_measured;  // min distance from the circle to all measured families
  std::vector<cplx> nodes;
  std::vector<cplx> weights;
  std::vector<BandPoint> sweep_data;
};

// Measures lambda_{1..4}^chi/|chi|^2 and the hom families over the sweep
// restricted to |chi|_inf <= mu, bisecting mu over {pi, pi/2, pi/4, ...} until
// the lambda_4 family separates. Circle: center ((a+b)/2, 0), radius
// (b-a)/2 + margin with margin = 0.5 min(a, gap), so the contour stays in the
// right half plane and below the lambda_4 family with factor-2 slack.
Contour build_contour(const ElasticityTensorField& A, const HomogenizedTensor& Ahom,
                      const std::vector<Vec3>& chi_sweep, const SolverConfig& cfg,
                      int quad_nodes = 64);

// g_{eps,chi}(z) = (|chi|^2 z / eps^2 + 1)^{-1}.
cplx g_eval(double eps, const Vec3& chi, cplx z);

// All rescaled correctors R_{j,chi}^{(k)} f for j in {0,1,2}, k = 0..n_cycles:
// -(1/2 pi i) \oint g_{eps,chi}(z) u_j^{(k)}(z) dz by contour quadrature, one
// cascade sweep per node. Returns table[k][j]. chi outside the mu box (or 0)
// is the caller's concern; see rescaled_corrector_apply for the boxed variant.
std::vector<std::array<SpectralField, 3>> rescaled_corrector_table(
    const std::shared_ptr<const CascadeWorkspace>& ws, double eps, const SpectralField& f,
    const Contour& contour, int n_cycles, const SolverConfig& cfg);

// Single rescaled corrector with the Def-5.3 box rule: returns the quadrature
// value for 0 < |chi|_inf <= mu and the zero field otherwise.
SpectralField rescaled_corrector_apply(const ElasticityTensorField& A, int j, int k,
                                       const Vec3& chi, double eps, const SpectralField& f,
                                       const Contour& contour, const SolverConfig& cfg);

// P_chi ((1/eps^2) A_chi + I)^{-1} P_chi f via the three lowest eigenpairs.
SpectralField windowed_resolvent(const FiberSpectrum& spec, double eps, const SpectralField& f);

// Same object by contour quadrature: sum_m weights[m] g_{eps,chi}(z_m)
// (A_chi/|chi|^2 - z_m)^{-1} f_low, for f_low already in the low subspace.
SpectralField contour_windowed_resolvent(const FiberOperator& op, double eps,
                                         const SpectralField& f_low, const Contour& contour,
                                         const SolverConfig& cfg);

}  // namespace homb
