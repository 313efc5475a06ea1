#include "homb/fullspace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>

namespace homb {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

BlochSource BlochSource::default_ball(std::uint64_t seed) {
  BlochSource src;
  src.K_radius = 1.0;
  const double r = std::sqrt(3.0 / 5.0);
  const double w_axis = kTwoPi / 9.0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      Vec3 node = Vec3::Zero();
      node[axis] = sign * r;
      src.nodes.push_back(node);
      src.weights.push_back(w_axis);
    }
  }
  // Interior node off every coordinate plane: all of its fiber images
  // 2 pi eps theta stay away from the chi = 0 singular fiber and from the
  // axis-aligned symmetry directions exercised above.
  src.nodes.push_back(0.15 / std::sqrt(3.0) * Vec3(1.0, 1.0, 1.0));
  src.weights.push_back(0.1 * w_axis);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> mass(src.nodes.size());
  for (std::size_t q = 0; q < src.nodes.size(); ++q) {
    Vec3c c;
    for (int p = 0; p < 3; ++p) c[p] = cplx(gauss(rng), gauss(rng));
    src.amplitudes.push_back(c);
    mass[q] = src.weights[q] * c.squaredNorm();
  }
  src.declared_l2_sq = pairwise_sum(std::span<const double>(mass));
  src.check();
  return src;
}

void BlochSource::check() const {
  const std::size_t q = nodes.size();
  if (q == 0 || weights.size() != q || amplitudes.size() != q)
    throw InvalidInput("source node/weight/amplitude lists must be nonempty and aligned");
  if (!(K_radius > 0.0)) throw InvalidInput("source K_radius must be positive");
  std::vector<double> mass(q);
  for (std::size_t i = 0; i < q; ++i) {
    if (!(weights[i] > 0.0)) throw InvalidInput("source weights must be positive");
    if (!nodes[i].allFinite() || !amplitudes[i].allFinite())
      throw InvalidInput("source nodes and amplitudes must be finite");
    if (nodes[i].norm() > K_radius * (1.0 + 1e-12))
      throw InvalidInput("source node escapes the declared support ball");
    mass[i] = weights[i] * amplitudes[i].squaredNorm();
  }
  const double total = pairwise_sum(std::span<const double>(mass));
  if (!(std::abs(total - declared_l2_sq) <= 1e-12 * std::max(1.0, declared_l2_sq)))
    throw InvalidInput("declared source norm disagrees with its quadrature");
}

std::vector<FiberData> fibers_for_epsilon(const BlochSource& src, double eps, double mu) {
  src.check();
  if (!(eps > 0.0) || !(mu > 0.0)) throw InvalidInput("eps and mu must be positive");
  const double scale = kTwoPi * eps;
  if (scale * src.K_radius > mu)
    throw EpsilonTooLarge("2 pi eps K_radius = " + std::to_string(scale * src.K_radius) +
                          " exceeds mu = " + std::to_string(mu));
  std::vector<FiberData> fibers;
  fibers.reserve(src.nodes.size());
  const double jac = scale * scale * scale;
  const double amp = 1.0 / std::sqrt(jac);
  for (std::size_t q = 0; q < src.nodes.size(); ++q)
    fibers.push_back({scale * src.nodes[q], jac * src.weights[q], amp * src.amplitudes[q]});
  return fibers;
}

SpectralField bloch_adapt(const FiberSpectrum& spec, const Vec3c& amplitude) {
  if (spec.eigenvectors.size() < 3) throw InvalidInput("bloch_adapt needs >= 3 eigenpairs");
  SpectralField out = SpectralField::zero(spec.eigenvectors[0].grid());
  for (int i = 0; i < 3; ++i) {
    const Vec3c m = spec.eigenvectors[i].mean();
    out = out + spec.eigenvectors[i] * m.dot(amplitude);
  }
  return out;
}

std::vector<SpectralField> bloch_approximate(const std::vector<FiberData>& fibers,
                                             const std::vector<FiberSpectrum>& specs) {
  if (fibers.size() != specs.size())
    throw MismatchedFibers("fiber and spectrum lists differ in length");
  std::vector<SpectralField> out;
  out.reserve(fibers.size());
  for (std::size_t q = 0; q < fibers.size(); ++q) {
    if ((specs[q].chi - fibers[q].chi).norm() > 1e-12 * std::max(1.0, fibers[q].chi.norm()))
      throw MismatchedFibers("spectrum and fiber disagree on chi");
    out.push_back(bloch_adapt(specs[q], fibers[q].amplitude));
  }
  return out;
}

SpectralField exact_fiber_solution(const FiberOperator& op, double eps, const SpectralField& rhs,
                                   const SolverConfig& cfg) {
  const double chi2 = op.chi().squaredNorm();
  if (!(chi2 > 0.0)) throw InvalidInput("exact_fiber_solution requires chi != 0");
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  // (1/eps^2) A_chi + I = (chi^2/eps^2) (A_chi/chi^2 - z) at z = -eps^2/chi^2.
  const double scale = eps * eps / chi2;
  return op.solve_resolvent(cplx(-scale, 0.0), rhs * cplx(scale, 0.0), cfg);
}

const char* truncation_name(Truncation t) {
  switch (t) {
    case Truncation::full:
      return "full";
    case Truncation::reduced_l2:
      return "reduced_l2";
    default:
      return "reduced_h1";
  }
}

Truncation truncation_from_name(const std::string& name) {
  if (name == "full") return Truncation::full;
  if (name == "reduced_l2") return Truncation::reduced_l2;
  if (name == "reduced_h1") return Truncation::reduced_h1;
  throw InvalidInput("unknown truncation '" + name + "'");
}

std::vector<std::pair<int, int>> truncation_terms(int n, Truncation t) {
  if (n < 0) throw InvalidInput("cycle count must be >= 0");
  std::vector<std::pair<int, int>> jk;
  const auto all_cycles_upto = [&jk](int kmax) {
    for (int k = 0; k <= kmax; ++k)
      for (int j = 0; j < 3; ++j) jk.emplace_back(j, k);
  };
  switch (t) {
    case Truncation::full:
      all_cycles_upto(n);
      break;
    case Truncation::reduced_l2:
      if (n == 0) {
        jk.emplace_back(0, 0);
      } else {
        all_cycles_upto(n - 2);
        jk.emplace_back(0, n - 1);
        jk.emplace_back(1, n - 1);
        jk.emplace_back(0, n);
      }
      break;
    case Truncation::reduced_h1:
      if (n == 0) {
        jk.emplace_back(0, 0);
        jk.emplace_back(1, 0);
      } else {
        all_cycles_upto(n - 2);
        jk.emplace_back(0, n - 1);
        jk.emplace_back(1, n - 1);
      }
      break;
  }
  return jk;
}

SpectralField expansion_fiber_solution(const ElasticityTensorField& A, const Vec3& chi, double eps,
                                       const SpectralField& rhs, int n, const Contour& contour,
                                       const SolverConfig& cfg, Truncation truncation) {
  if (chi.squaredNorm() == 0.0 || chi.cwiseAbs().maxCoeff() > contour.mu)
    return SpectralField::zero(A.grid());
  const auto ws = std::make_shared<CascadeWorkspace>(A, chi, cfg);
  const auto table = rescaled_corrector_table(ws, eps, rhs, contour, n, cfg);
  SpectralField out = SpectralField::zero(A.grid());
  for (const auto& [j, k] : truncation_terms(n, truncation)) out = out + table[k][j];
  return out;
}

ErrorPair assemble_errors(const std::vector<FiberData>& fibers, double eps,
                          const std::vector<SpectralField>& exact,
                          const std::vector<SpectralField>& expanded) {
  if (fibers.empty() || exact.size() != fibers.size() || expanded.size() != fibers.size())
    throw MismatchedFibers("fiber and solution lists must be nonempty and aligned");
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  const std::size_t q = fibers.size();
  std::vector<double> l2_terms(q), grad_terms(q);
  for (std::size_t i = 0; i < q; ++i) {
    const SpectralField diff = exact[i] - expanded[i];
    const double l2 = norm_l2(diff);
    const double gr = fiber_grad_norm(diff, fibers[i].chi);
    l2_terms[i] = fibers[i].weight * l2 * l2;
    grad_terms[i] = fibers[i].weight * gr * gr / (eps * eps);
  }
  ErrorPair out;
  const double l2sq = pairwise_sum(std::span<const double>(l2_terms));
  out.l2 = std::sqrt(l2sq);
  out.h1 = std::sqrt(l2sq + pairwise_sum(std::span<const double>(grad_terms)));
  return out;
}

double fit_slope(const std::vector<double>& eps_values, const std::vector<double>& errors) {
  if (eps_values.size() != errors.size()) throw InvalidInput("eps and error lists must align");
  if (eps_values.size() < 4) throw InsufficientData("slope fit needs >= 4 points");
  double emin = eps_values[0], emax = eps_values[0];
  for (const double e : eps_values) {
    if (!(e > 0.0)) throw InsufficientData("slope fit needs positive eps values");
    emin = std::min(emin, e);
    emax = std::max(emax, e);
  }
  if (std::log10(emax / emin) < 1.2 - 1e-12)
    throw InsufficientData("slope fit needs >= 1.2 decades of eps");
  const std::size_t m = eps_values.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
      throw InsufficientData("slope fit needs positive finite errors");
    x[i] = std::log10(eps_values[i]);
    y[i] = std::log10(errors[i]);
  }
  const double xbar = pairwise_sum(std::span<const double>(x)) / double(m);
  const double ybar = pairwise_sum(std::span<const double>(y)) / double(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  return sxy / sxx;
}

void finalize_report(ConvergenceReport& report, int n_max) {
  report.slopes.clear();
  bool all_pass = true;
  for (int n = 0; n <= n_max; ++n) {
    std::vector<double> eps, l2, h1;
    for (const ConvergencePoint& p : report.points) {
      if (p.n != n) continue;
      eps.push_back(p.eps);
      l2.push_back(p.l2_error);
      h1.push_back(p.h1_error);
    }
    SlopeRow row;
    row.n = n;
    row.l2_expected = n + 1.0;
    row.h1_expected = static_cast<double>(n);
    row.h1_checked = n >= 1;
    row.l2_slope = fit_slope(eps, l2);
    row.h1_slope = fit_slope(eps, h1);
    // Points arrive eps-descending; the rate claim includes strict decrease.
    row.l2_monotone = true;
    row.h1_monotone = true;
    for (std::size_t i = 1; i < eps.size(); ++i) {
      if (!(l2[i] < l2[i - 1])) row.l2_monotone = false;
      if (!(h1[i] < h1[i - 1])) row.h1_monotone = false;
    }
    row.l2_pass = row.l2_monotone && std::abs(row.l2_slope - row.l2_expected) <= report.slope_tol;
    row.h1_pass = !row.h1_checked ||
                  (row.h1_monotone && std::abs(row.h1_slope - row.h1_expected) <= report.slope_tol);
    all_pass = all_pass && row.l2_pass && row.h1_pass;
    report.slopes.push_back(row);
  }
  report.pass = all_pass;
}

}  // namespace homb
