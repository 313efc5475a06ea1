#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "homb/homogenize.hpp"

namespace homb {

// z-independent per-(A, chi) state for the corrector cascade: the three
// chi-correctors w_q solving
//   int_Y A(sym grad w_q + i X_chi e_q) : sym grad conj(v) = 0,  mean w_q = 0,
// and the fibered homogenized matrix B assembled from them. Every u_1^{(n)}
// superposes the w_q (the discrete cell solves are linear in the data), and
// the u_0^{(n)} pinning uses the same B, so the solvability condition of every
// u_2^{(n)} equation cancels to rounding rather than to solver tolerance.
class CascadeWorkspace {
 public:
  CascadeWorkspace(const ElasticityTensorField& A, const Vec3& chi, const SolverConfig& cfg);

  const ElasticityTensorField& coeff() const { return *A_; }
  const CellGrid& grid() const { return A_->grid(); }
  const Vec3& chi() const { return chi_; }
  double chi2() const { return chi2_; }
  // Directly assembled A_chi^hom (Hermitian to solver tolerance; kept raw).
  const Mat3c& b_matrix() const { return B_; }
  // Ascending eigenvalues of the Hermitian part of B/|chi|^2.
  const std::array<double, 3>& hom_eigs() const { return hom_eigs_; }
  const SpectralField& chi_corrector(int q) const { return w_[q]; }

  SpectralField u1_for(const Vec3c& u0) const;

  // Solves (B/|chi|^2 - z) u0 = rhs. Throws HomSingular when
  // dist(z, hom spectrum) < 1e-8.
  Vec3c pin_u0(cplx z, const Vec3c& rhs) const;

 private:
  const ElasticityTensorField* A_;
  Vec3 chi_;
  double chi2_;
  std::vector<SpectralField> w_;
  Mat3c B_;
  std::array<double, 3> hom_eigs_;
};

struct CycleTerms {
  Vec3c u0;               // u_0^{(k)} is constant in y
  SpectralField u0_field;  // the same constant as a field
  SpectralField u1;        // mean-zero
  SpectralField u2;        // mean-zero
};

struct CascadeResult {
  Vec3 chi;
  cplx z;
  int n_cycles = -1;  // highest completed cycle index
  std::vector<CycleTerms> cycles;
  std::vector<std::array<FieldNorms, 3>> term_norms;   // [k][j]
  std::vector<double> solvability_residuals;           // relative, per cycle
  SpectralField f_ref;
  std::shared_ptr<const CascadeWorkspace> ws;

  const SpectralField& term(int j, int k) const;
};

// Cycle 0: u_0^{(0)} solves the 3x3 homogenized resolvent system against the
// mean of f, u_1^{(0)} and u_2^{(0)} are the mean-zero cell solves with the
// cycle-0 right-hand sides (the u_2 equation carries the z |chi|^2 u_0 and
// |chi|^2 f loads).
CascadeResult run_cycle0(const std::shared_ptr<const CascadeWorkspace>& ws, cplx z,
                         const SpectralField& f, const SolverConfig& cfg);
CascadeResult run_cycle0(const ElasticityTensorField& A, const Vec3& chi, cplx z,
                         const SpectralField& f, const SolverConfig& cfg);

// Cycle k >= 1 appended in place; requires cycles 0..k-1 present. u_0^{(k)} is
// pinned by the solvability condition, u_1^{(k)}, u_2^{(k)} are mean-zero cell
// solves.
void run_cycle(int k, CascadeResult& state, const SolverConfig& cfg);

// run_cycle0 followed by run_cycle up to n_cycles.
CascadeResult run_cascade(const std::shared_ptr<const CascadeWorkspace>& ws, cplx z,
                          const SpectralField& f, int n_cycles, const SolverConfig& cfg);

// Riesz representative r of the error functional at the state's top cycle n:
// R(v) = int_Y r . conj(v). Terms: the X_chi / sym-grad couplings of
// u_2^{(n-1)}, u_1^{(n)}, u_2^{(n)} plus the z |chi|^2 loads.
SpectralField residual_riesz(const CascadeResult& state);

// R_error^{(n)}(v) evaluated directly.
cplx residual_functional(const CascadeResult& state, const SpectralField& v);

// Forms u_error^{(n)} = u_exact - sum of all terms and checks
//   (1/|chi|^2) a_chi(u_error, v) - z <u_error, v> = (1/|chi|^2) R(v)
// against `trials` seeded random band-limited test fields v. Returns the
// maximum relative defect.
double verify_error_equation(const CascadeResult& state, const SpectralField& u_exact, int trials);

// Sum of the selected terms (j, k).
SpectralField sum_terms(const CascadeResult& state, const std::vector<std::pair<int, int>>& jk);

struct PaperConstants {
  double C0, C1, C2, C, C_error;
};

// C0 = max{3/nu, 1}; C1 = max{3 C_K/nu^3, C_K/nu^2, 1};
// C2 = max{4 C_K^2/nu^2 C1 + 6 C_K^2/nu max{1, 1/nu} C0, 1};
// C = max{C0, C1, C2}; C_error = 4 max{6 + 2/nu, 8/nu, 1}.
PaperConstants paper_constants(double nu, double c_korn);

// Largest ratio ||u||_H1 / ||sym grad u|| over mean-zero discrete fields,
// computed mode by mode (the minimizer at each frequency is orthogonal to it).
double measure_c_korn(const CellGrid& g);

}  // namespace homb
