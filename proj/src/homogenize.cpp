#include "homb/homogenize.hpp"

#include <cmath>

#include "homb/krylov.hpp"

namespace homb {

namespace {

// Node-mean of one strain component, deterministic reduction.
cplx component_mean(const StrainField& s, int i, int j) {
  const std::size_t N = s.grid().num_nodes();
  return pairwise_sum(std::span<const cplx>(s.data().data() + (3 * i + j) * N, N)) / double(N);
}

}  // namespace

std::array<double, 81> HomogenizedTensor::tensor_components() const {
  std::array<double, 81> T{};
  for (int b = 0; b < 6; ++b) {
    const Mat3 Eb = sym_basis_matrix(b);
    for (int c = 0; c < 6; ++c) {
      const Mat3 Ec = sym_basis_matrix(c);
      const double m = mandel(b, c);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
              T[((i * 3 + j) * 3 + k) * 3 + l] += m * Eb(i, j) * Ec(k, l);
    }
  }
  return T;
}

SpectralField corrector_for_strain(const ElasticityTensorField& A, const Mat3& xi,
                                   const SolverConfig& cfg) {
  A.certificate();
  const CellGrid& g = A.grid();
  const StrainField Axi = apply_pointwise(A, StrainField::constant(g, xi.cast<cplx>()));
  const CellRhs rhs{Axi * cplx(-1.0), SpectralField::zero(g)};
  return solve_cell(A, rhs, cfg);
}

CorrectorBasis CorrectorBasis::solve(const ElasticityTensorField& A, const SolverConfig& cfg) {
  CorrectorBasis basis;
  basis.N.reserve(6);
  for (int b = 0; b < 6; ++b) basis.N.push_back(corrector_for_strain(A, sym_basis_matrix(b), cfg));
  return basis;
}

HomogenizedTensor assemble_A_hom(const ElasticityTensorField& A, const CorrectorBasis& basis,
                                 const SolverConfig& cfg) {
  cfg.check();
  if (basis.N.size() != 6) throw InvalidInput("corrector basis must hold six fields");
  const CellGrid& g = A.grid();
  Mat6 M;
  for (int b = 0; b < 6; ++b) {
    const StrainField sb =
        StrainField::constant(g, sym_basis_matrix(b).cast<cplx>()) + sym_gradient(basis.N[b]);
    const StrainField Asb = apply_pointwise(A, sb);
    for (int c = 0; c < 6; ++c) {
      const Mat3 Ec = sym_basis_matrix(c);
      cplx acc = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (Ec(i, j) != 0.0) acc += component_mean(Asb, i, j) * Ec(i, j);
      M(b, c) = acc.real();
    }
  }
  HomogenizedTensor out;
  out.asymmetry = (M - M.transpose()).cwiseAbs().maxCoeff();
  out.mandel = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat6> es(out.mandel, Eigen::EigenvaluesOnly);
  out.eig_min = es.eigenvalues()(0);
  out.eig_max = es.eigenvalues()(5);
  if (!(out.eig_min > 0.0))
    throw CoercivityFailure("homogenized tensor not positive definite: min eigenvalue " +
                            std::to_string(out.eig_min));
  out.nu_hom = std::min(out.eig_min, 1.0 / out.eig_max);
  return out;
}

Mat3c a_chi_hom(const HomogenizedTensor& Ahom, const Vec3& chi) {
  return constant_symbol(Ahom.tensor_components(), chi).cast<cplx>();
}

Mat3c a_chi_hom_direct(const ElasticityTensorField& A, const Vec3& chi, const SolverConfig& cfg) {
  if (chi.squaredNorm() == 0.0) throw InvalidInput("a_chi_hom_direct requires chi != 0");
  const CellGrid& g = A.grid();
  Mat3c B;
  std::array<StrainField, 3> xc = {StrainField(g), StrainField(g), StrainField(g)};
  for (int q = 0; q < 3; ++q) {
    Vec3c eq = Vec3c::Zero();
    eq(q) = 1.0;
    xc[q] = x_chi_apply(SpectralField::constant(g, eq), chi);
  }
  for (int q = 0; q < 3; ++q) {
    // Cell problem: int A(sym grad u + i X_chi e_q) : sym grad conj(v) = 0.
    const CellRhs rhs{apply_pointwise(A, xc[q]) * cplx(0, -1), SpectralField::zero(g)};
    const SpectralField uq = solve_cell(A, rhs, cfg);
    const StrainField flux = apply_pointwise(A, sym_gradient(uq) + xc[q] * cplx(0, 1));
    for (int p = 0; p < 3; ++p) B(p, q) = inner(flux, xc[p] * cplx(0, 1));
  }
  return B;
}

std::array<double, 3> hom_eigen(const Vec3& chi, const HomogenizedTensor& Ahom) {
  const Mat3c B = a_chi_hom(Ahom, chi);
  Eigen::SelfAdjointEigenSolver<Mat3c> es(0.5 * (B + B.adjoint()), Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
}

}  // namespace homb
