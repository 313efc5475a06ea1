#include "homb/run_pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <thread>

#include <json.hpp>

#include "homb/spectral_fiber.hpp"

namespace homb {

namespace {

using json = nlohmann::ordered_json;

constexpr double kPi = 3.1415926535897932384626433832795;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << content;
}

// Maps the unit-ball rule onto a ball of the configured radius.
BlochSource scaled_source(const RunConfig& cfg) {
  BlochSource src = BlochSource::default_ball(cfg.source_seed);
  const double r = cfg.source_radius;
  if (r != 1.0) {
    const double jac = r * r * r;
    for (auto& node : src.nodes) node *= r;
    for (auto& w : src.weights) w *= jac;
    src.K_radius *= r;
    src.declared_l2_sq *= jac;
    src.check();
  }
  return src;
}

struct Prepared {
  ElasticityTensorField A;
  HomogenizedTensor Ahom;
  Contour contour;
};

Prepared prepare(const RunConfig& cfg, std::ostream& log) {
  ElasticityTensorField A = build_coefficients(cfg.coefficients, cfg.grid_n);
  log << "[prep] coefficients: " << A.description() << ", nu = " << A.nu() << "\n";
  const CorrectorBasis basis = CorrectorBasis::solve(A, cfg.solver);
  const HomogenizedTensor Ahom = assemble_A_hom(A, basis, cfg.solver);
  log << "[prep] homogenized tensor: eig range [" << Ahom.eig_min << ", " << Ahom.eig_max
      << "], asymmetry " << Ahom.asymmetry << "\n";
  Contour contour = build_contour(A, Ahom, default_chi_sweep(), cfg.solver,
                                  cfg.contour_quad_nodes);
  log << "[prep] contour: mu = " << contour.mu << ", center " << contour.center.real()
      << ", radius " << contour.radius << ", buffer " << contour.rho0_measured << "\n";
  return {std::move(A), Ahom, std::move(contour)};
}

}  // namespace

void parallel_for(int nitems, int workers, const std::function<void(int)>& fn) {
  if (nitems <= 0) return;
  const int nthreads = std::max(1, std::min(workers, nitems));
  if (nthreads == 1) {
    for (int i = 0; i < nitems; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= nitems) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<Vec3> default_chi_sweep() {
  const double s2 = std::sqrt(0.5);
  const double s3 = 1.0 / std::sqrt(3.0);
  const double s5 = 1.0 / std::sqrt(5.0);
  const std::vector<Vec3> dirs = {
      Vec3(1, 0, 0),         Vec3(0, 1, 0),          Vec3(0, 0, 1),
      Vec3(s2, s2, 0),       Vec3(s2, 0, s2),        Vec3(s3, s3, s3),
      Vec3(2 * s5, s5, 0)};
  std::vector<Vec3> sweep;
  for (double r = kPi; r >= kPi / 16.0 - 1e-12; r *= 0.5)
    for (const Vec3& d : dirs) sweep.push_back(r * d);
  return sweep;
}

ValidateReport run_validate(const RunConfig& cfg, std::ostream& log) {
  ValidateReport rep;
  ElasticityTensorField A = build_coefficients(cfg.coefficients, cfg.grid_n);
  rep.description = A.description();
  rep.grid_n = cfg.grid_n;
  rep.cert = A.certificate();
  rep.nu = A.nu();
  rep.c_korn = measure_c_korn(A.grid());
  rep.constants = paper_constants(rep.nu, rep.c_korn);
  rep.pass = rep.cert.symmetric && rep.cert.nu_measured > 0.0;
  log << "[validate] " << rep.description << ": nu_measured = " << rep.cert.nu_measured
      << ", nu_upper = " << rep.cert.nu_upper << ", C_Korn = " << rep.c_korn << "\n";

  json j;
  j["coefficients"] = rep.description;
  j["grid"] = rep.grid_n;
  j["symmetric"] = rep.cert.symmetric;
  j["nu_measured"] = rep.cert.nu_measured;
  j["nu_upper"] = rep.cert.nu_upper;
  j["nu"] = rep.nu;
  j["c_korn"] = rep.c_korn;
  j["constants"] = {{"C0", rep.constants.C0},
                    {"C1", rep.constants.C1},
                    {"C2", rep.constants.C2},
                    {"C", rep.constants.C},
                    {"C_error", rep.constants.C_error}};
  j["pass"] = rep.pass;
  write_text(std::filesystem::path(cfg.out_dir) / "certificate.json", j.dump(2) + "\n");
  return rep;
}

Contour run_bands(const RunConfig& cfg, std::ostream& log) {
  const Prepared prep = prepare(cfg, log);
  const Contour& ct = prep.contour;

  std::string csv = "chi1,chi2,chi3,chi_norm,lam1,lam2,lam3,lam4,hom1,hom2,hom3\n";
  for (const BandPoint& p : ct.sweep_data) {
    csv += fmt(p.chi[0]) + "," + fmt(p.chi[1]) + "," + fmt(p.chi[2]) + "," + fmt(p.chi.norm());
    for (int i = 0; i < 4; ++i) csv += "," + fmt(p.lam_rescaled[i]);
    for (int i = 0; i < 3; ++i) csv += "," + fmt(p.hom_rescaled[i]);
    csv += "\n";
  }
  write_text(std::filesystem::path(cfg.out_dir) / "bands.csv", csv);

  json j;
  j["mu"] = ct.mu;
  j["center_re"] = ct.center.real();
  j["center_im"] = ct.center.imag();
  j["radius"] = ct.radius;
  j["rho0_measured"] = ct.rho0_measured;
  j["quad_nodes"] = static_cast<int>(ct.nodes.size());
  j["sweep_points"] = static_cast<int>(ct.sweep_data.size());
  write_text(std::filesystem::path(cfg.out_dir) / "contour.json", j.dump(2) + "\n");
  log << "[bands] wrote " << ct.sweep_data.size() << " sweep points\n";
  return ct;
}

ConvergenceReport run_converge(const RunConfig& cfg, std::ostream& log) {
  const Prepared prep = prepare(cfg, log);
  const ElasticityTensorField& A = prep.A;
  const Contour& contour = prep.contour;
  const SolverConfig& scfg = cfg.solver;
  const Truncation trunc = truncation_from_name(cfg.truncation);
  const BlochSource src = scaled_source(cfg);
  const int n_max = cfg.cycles;

  ConvergenceReport report;
  report.truncation = trunc;
  report.grid_n = cfg.grid_n;
  report.mu = contour.mu;
  report.contour_m = cfg.contour_quad_nodes;
  report.declared_l2_sq = src.declared_l2_sq;

  for (const double eps : cfg.eps_ladder) {
    try {
      (void)fibers_for_epsilon(src, eps, contour.mu);
      report.eps_used.push_back(eps);
    } catch (const EpsilonTooLarge& e) {
      log << "[converge] pruning eps = " << eps << ": " << e.what() << "\n";
      report.eps_pruned.push_back(eps);
    }
  }

  struct FiberOut {
    std::optional<SpectralField> exact;
    std::vector<SpectralField> expansion_by_n;
    std::vector<SpectralField> expansion_h1_by_n;
    double bloch_sq = 0.0;
  };

  std::vector<std::vector<ConvergencePoint>> by_n(n_max + 1);
  for (const double eps : report.eps_used) {
    const std::vector<FiberData> fibers = fibers_for_epsilon(src, eps, contour.mu);
    std::vector<FiberOut> out(fibers.size());
    parallel_for(static_cast<int>(fibers.size()), cfg.workers, [&](int q) {
      const FiberData& fd = fibers[q];
      const FiberOperator op(A, fd.chi);
      const FiberSpectrum spec = lowest_eigenpairs(op, 3, scfg);
      const SpectralField f = bloch_adapt(spec, fd.amplitude);
      out[q].exact = exact_fiber_solution(op, eps, f, scfg);
      const auto ws = std::make_shared<CascadeWorkspace>(A, fd.chi, scfg);
      const auto table = rescaled_corrector_table(ws, eps, f, contour, n_max, scfg);
      // The L2 rate is claimed for the configured truncation; the H1 rate is
      // claimed for the reduced H1 sum, so each point carries both.
      for (int n = 0; n <= n_max; ++n) {
        SpectralField sum = SpectralField::zero(A.grid());
        for (const auto& [j, k] : truncation_terms(n, trunc)) sum = sum + table[k][j];
        out[q].expansion_by_n.push_back(std::move(sum));
        SpectralField sum_h1 = SpectralField::zero(A.grid());
        for (const auto& [j, k] : truncation_terms(n, Truncation::reduced_h1))
          sum_h1 = sum_h1 + table[k][j];
        out[q].expansion_h1_by_n.push_back(std::move(sum_h1));
      }
      const double fn = norm_l2(f);
      out[q].bloch_sq = fd.weight * fn * fn;
    });

    std::vector<double> bloch_terms(fibers.size());
    std::vector<SpectralField> exact;
    exact.reserve(fibers.size());
    for (std::size_t q = 0; q < fibers.size(); ++q) {
      bloch_terms[q] = out[q].bloch_sq;
      exact.push_back(*out[q].exact);
    }
    const double bloch_norm = std::sqrt(pairwise_sum(std::span<const double>(bloch_terms)));

    for (int n = 0; n <= n_max; ++n) {
      std::vector<SpectralField> expanded, expanded_h1;
      expanded.reserve(fibers.size());
      expanded_h1.reserve(fibers.size());
      for (std::size_t q = 0; q < fibers.size(); ++q) {
        expanded.push_back(out[q].expansion_by_n[n]);
        expanded_h1.push_back(out[q].expansion_h1_by_n[n]);
      }
      const ErrorPair err = assemble_errors(fibers, eps, exact, expanded);
      const ErrorPair err_h1 = assemble_errors(fibers, eps, exact, expanded_h1);
      by_n[n].push_back({n, eps, err.l2, err_h1.h1, bloch_norm});
    }
    log << "[converge] eps = " << eps << " done (" << fibers.size() << " fibers)\n";
  }

  for (int n = 0; n <= n_max; ++n)
    report.points.insert(report.points.end(), by_n[n].begin(), by_n[n].end());
  finalize_report(report, n_max);

  std::string csv = "n,eps,l2_error,h1_error,l2_truncation,grid,mu,contour_M\n";
  for (const ConvergencePoint& p : report.points) {
    csv += std::to_string(p.n) + "," + fmt(p.eps) + "," + fmt(p.l2_error) + "," +
           fmt(p.h1_error) + "," + truncation_name(trunc) + "," + std::to_string(cfg.grid_n) +
           "," + fmt(contour.mu) + "," + std::to_string(cfg.contour_quad_nodes) + "\n";
  }
  write_text(std::filesystem::path(cfg.out_dir) / "points.csv", csv);

  std::string plot;
  for (int n = 0; n <= n_max; ++n) {
    plot += "# n = " + std::to_string(n) + " (eps  l2_error  h1_error)\n";
    for (const ConvergencePoint& p : report.points)
      if (p.n == n) plot += fmt(p.eps) + "  " + fmt(p.l2_error) + "  " + fmt(p.h1_error) + "\n";
    if (n < n_max) plot += "\n\n";
  }
  write_text(std::filesystem::path(cfg.out_dir) / "plot.dat", plot);

  json j;
  j["grid"] = report.grid_n;
  j["mu"] = report.mu;
  j["contour_M"] = report.contour_m;
  j["l2_truncation"] = truncation_name(trunc);
  j["h1_truncation"] = truncation_name(Truncation::reduced_h1);
  j["slope_tol"] = report.slope_tol;
  j["declared_l2_sq"] = report.declared_l2_sq;
  j["eps_used"] = report.eps_used;
  j["eps_pruned"] = report.eps_pruned;
  j["points"] = json::array();
  for (const ConvergencePoint& p : report.points) {
    j["points"].push_back({{"n", p.n},
                           {"eps", p.eps},
                           {"l2_error", p.l2_error},
                           {"h1_error", p.h1_error},
                           {"bloch_norm", p.bloch_norm},
                           {"l2_rel", p.l2_error / p.bloch_norm},
                           {"h1_rel", p.h1_error / p.bloch_norm}});
  }
  j["slopes"] = json::array();
  for (const SlopeRow& s : report.slopes) {
    j["slopes"].push_back({{"n", s.n},
                           {"l2_slope", s.l2_slope},
                           {"l2_expected", s.l2_expected},
                           {"l2_monotone", s.l2_monotone},
                           {"l2_pass", s.l2_pass},
                           {"h1_slope", s.h1_slope},
                           {"h1_expected", s.h1_expected},
                           {"h1_monotone", s.h1_monotone},
                           {"h1_checked", s.h1_checked},
                           {"h1_pass", s.h1_pass}});
  }
  j["pass"] = report.pass;
  write_text(std::filesystem::path(cfg.out_dir) / "report.json", j.dump(2) + "\n");

  for (const SlopeRow& s : report.slopes)
    log << "[converge] n = " << s.n << ": L2 slope " << s.l2_slope << " (expect "
        << s.l2_expected << (s.l2_pass ? ", ok)" : ", FAIL)") << ", H1 slope " << s.h1_slope
        << (s.h1_checked ? (s.h1_pass ? " (ok)" : " (FAIL)") : " (not checked)") << "\n";
  return report;
}

std::string constants_json(double nu, double c_korn) {
  const PaperConstants c = paper_constants(nu, c_korn);
  json j;
  j["nu"] = nu;
  j["c_korn"] = c_korn;
  j["C0"] = c.C0;
  j["C1"] = c.C1;
  j["C2"] = c.C2;
  j["C"] = c.C;
  j["C_error"] = c.C_error;
  return j.dump(2) + "\n";
}

}  // namespace homb
