#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "homb/spectral_fiber.hpp"

namespace homb {

// Band-limited source model: the Fourier transform of f sampled on a finite
// quadrature rule over a compact ball K of radius K_radius. Full-space norms
// are fiber-weighted quadrature sums, so no large-domain discretization exists
// anywhere in the harness.
struct BlochSource {
  std::vector<Vec3> nodes;        // theta_q in K
  std::vector<double> weights;    // quadrature weights for d theta, > 0
  std::vector<Vec3c> amplitudes;  // F(f)(theta_q)
  double K_radius = 1.0;
  double declared_l2_sq = 0.0;  // ||f||^2 surrogate: sum_q w_q |c_q|^2

  // 7-node rule on the unit ball: the six axis nodes +-sqrt(3/5) e_i of the
  // classical degree-3 rule (weight 2 pi/9 each) plus one interior node off
  // every axis so that no fiber ever sits at chi = 0. Amplitudes are seeded
  // complex Gaussians.
  static BlochSource default_ball(std::uint64_t seed = 7);

  void check() const;  // throws InvalidInput on any broken invariant
};

// One Gelfand fiber of the source at a given epsilon.
struct FiberData {
  Vec3 chi;         // 2 pi eps theta_q
  double weight;    // (2 pi eps)^3 w_q, the d chi measure
  Vec3c amplitude;  // (2 pi eps)^{-3/2} c_q, constant-in-y fiber data
};

// chi_q = 2 pi eps theta_q with Jacobian-weighted measure and the unitary
// amplitude rescaling. Throws EpsilonTooLarge when the mapped support escapes
// the mu box certified by the contour.
std::vector<FiberData> fibers_for_epsilon(const BlochSource& src, double eps, double mu);

// P_chi on constant data c: sum_{i<3} (c . conj(mean w_i)) w_i with the three
// lowest eigenvectors w_i.
SpectralField bloch_adapt(const FiberSpectrum& spec, const Vec3c& amplitude);

// Batch form over matching fiber / spectrum lists.
std::vector<SpectralField> bloch_approximate(const std::vector<FiberData>& fibers,
                                             const std::vector<FiberSpectrum>& specs);

// ((1/eps^2) A_chi + I) u = rhs, i.e. the fiber of (A_eps + I)^{-1}.
SpectralField exact_fiber_solution(const FiberOperator& op, double eps, const SpectralField& rhs,
                                   const SolverConfig& cfg);

enum class Truncation { full, reduced_l2, reduced_h1 };

const char* truncation_name(Truncation t);
Truncation truncation_from_name(const std::string& name);  // throws InvalidInput

// Kept (j, k) pairs of the order-n expansion. full keeps every term with
// k <= n; the reduced sets drop the trailing terms whose size already matches
// the target error (u_2 of cycle n-1 and u_1, u_2 of cycle n; the H1 set also
// drops the constant u_0 of cycle n, which carries no oscillation).
std::vector<std::pair<int, int>> truncation_terms(int n, Truncation t);

// Sum of the selected rescaled correctors at one fiber. Zero field for chi
// outside the mu box (the expansion is windowed).
SpectralField expansion_fiber_solution(const ElasticityTensorField& A, const Vec3& chi, double eps,
                                       const SpectralField& rhs, int n, const Contour& contour,
                                       const SolverConfig& cfg, Truncation truncation);

struct ErrorPair {
  double l2 = 0.0;
  double h1 = 0.0;
};

// Gelfand-norm quadrature of the per-fiber differences D_q:
//   l2^2 = sum_q weight_q ||D_q||^2,
//   h1^2 = l2^2 + sum_q weight_q (1/eps^2) ||grad D_q + i D_q chi_q^T||^2.
// Throws MismatchedFibers unless the three lists line up.
ErrorPair assemble_errors(const std::vector<FiberData>& fibers, double eps,
                          const std::vector<SpectralField>& exact,
                          const std::vector<SpectralField>& expanded);

// Least-squares slope of log error against log eps. Requires >= 4 points
// spanning >= 1.2 decades in eps; throws InsufficientData otherwise.
double fit_slope(const std::vector<double>& eps_values, const std::vector<double>& errors);

struct ConvergencePoint {
  int n = 0;
  double eps = 0.0;
  double l2_error = 0.0;
  double h1_error = 0.0;
  double bloch_norm = 0.0;  // ||Xi f|| at this eps, for relative reporting
};

struct SlopeRow {
  int n = 0;
  double l2_slope = 0.0;
  double h1_slope = 0.0;
  double l2_expected = 0.0;  // n + 1
  double h1_expected = 0.0;  // n
  bool l2_monotone = false;
  bool h1_monotone = false;
  bool h1_checked = false;  // the H1 rate is asserted for n >= 1 only
  bool l2_pass = false;
  bool h1_pass = false;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;  // n-major, eps descending
  std::vector<SlopeRow> slopes;
  double slope_tol = 0.3;
  Truncation truncation = Truncation::full;
  int grid_n = 0;
  double mu = 0.0;
  int contour_m = 0;
  double declared_l2_sq = 0.0;
  std::vector<double> eps_used;     // surviving ladder, descending
  std::vector<double> eps_pruned;   // entries dropped by EpsilonTooLarge
  bool pass = false;
};

// Fits slopes and applies the tolerance + strict monotonicity checks to a
// filled point table. Points must cover every (n, eps) pair.
void finalize_report(ConvergenceReport& report, int n_max);

}  // namespace homb
