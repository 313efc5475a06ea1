#pragma once

#include <array>
#include <vector>

#include "homb/coefficients.hpp"
#include "homb/fiber_operator.hpp"

namespace homb {

// Constant homogenized tensor in the orthonormal symmetric-matrix basis
// (6x6, symmetric). nu_hom = min(eig_min, 1/eig_max) is the certified
// two-sided coercivity constant.
struct HomogenizedTensor {
  Mat6 mandel;        // symmetrized assembled matrix
  double asymmetry;   // max |M - M^T| entry before symmetrization
  double eig_min;
  double eig_max;
  double nu_hom;

  // Full 4th-order components in the same storage layout as
  // ElasticityTensorField (T_ijkl with (A xi)_ij = sum T_ijkl xi_kl).
  std::array<double, 81> tensor_components() const;
};

// Six mean-zero cell correctors N_b, one per basis strain sym_basis_matrix(b).
struct CorrectorBasis {
  std::vector<SpectralField> N;  // size 6

  static CorrectorBasis solve(const ElasticityTensorField& A, const SolverConfig& cfg);
};

// Mean-zero u^xi with int_Y A(xi + sym grad u^xi) : sym grad conj(v) = 0.
SpectralField corrector_for_strain(const ElasticityTensorField& A, const Mat3& xi,
                                   const SolverConfig& cfg);

// (A^hom)_{bc} = int_Y A(xi_b + sym grad N_b) : xi_c over the orthonormal
// basis. Throws CoercivityFailure if the assembled matrix is not positive
// definite.
HomogenizedTensor assemble_A_hom(const ElasticityTensorField& A, const CorrectorBasis& basis,
                                 const SolverConfig& cfg);

// 3x3 Hermitian matrix of (iX_chi)^* A^hom (iX_chi): entries
// A^hom sym(e_q chi^T) : sym(e_p chi^T). Real symmetric for real A^hom.
Mat3c a_chi_hom(const HomogenizedTensor& Ahom, const Vec3& chi);

// Same matrix assembled from the chi-dependent cell problem directly,
// bypassing A^hom. Requires chi != 0.
Mat3c a_chi_hom_direct(const ElasticityTensorField& A, const Vec3& chi, const SolverConfig& cfg);

// Ascending eigenvalues of a_chi_hom(Ahom, chi).
std::array<double, 3> hom_eigen(const Vec3& chi, const HomogenizedTensor& Ahom);

}  // namespace homb
