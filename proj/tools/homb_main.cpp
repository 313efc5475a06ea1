#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "homb/run_pipeline.hpp"

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  a requested check failed (slopes, certificate) or unexpected error\n"
    "  2  coefficient validation failure (symmetry or ellipticity)\n"
    "  3  no spectral separation: contour construction failed\n"
    "  4  configuration error\n"
    "  5  iterative solver did not converge\n"
    "  6  not enough usable data (eps ladder pruned or slope fit starved)\n";

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const homb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const homb::SymmetryViolation& e) {
    std::cerr << "coefficient error: " << e.what() << "\n";
    return 2;
  } catch (const homb::NotElliptic& e) {
    std::cerr << "coefficient error: " << e.what() << "\n";
    return 2;
  } catch (const homb::NoSeparation& e) {
    std::cerr << "spectral error: " << e.what() << "\n";
    return 3;
  } catch (const homb::NoConvergence& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 5;
  } catch (const homb::EpsilonTooLarge& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 6;
  } catch (const homb::InsufficientData& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 6;
  } catch (const homb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical workbench for operator-asymptotic homogenization of periodic "
               "elasticity: cell solvers, corrector cascade, spectral contours, and "
               "convergence-rate verification."};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  std::string config_path, out_dir, truncation;
  int workers = 0, grid = 0, cycles = -1;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file (key = value sections)");
    sub->add_option("--out", out_dir, "output directory (overrides run.out_dir)");
    sub->add_option("--workers", workers, "worker threads (overrides run.workers)");
    sub->add_option("--grid", grid, "nodes per axis (overrides grid.n)");
    sub->add_option("--cycles", cycles, "cascade cycles (overrides cascade.cycles)");
    sub->add_option("--truncation", truncation,
                    "full | reduced_l2 | reduced_h1 (overrides run.truncation)");
  };

  CLI::App* cmd_validate = app.add_subcommand("validate", "coefficient audit and certificate");
  CLI::App* cmd_bands = app.add_subcommand("bands", "eigenvalue families and contour");
  CLI::App* cmd_converge = app.add_subcommand("converge", "full convergence study");
  add_common(cmd_validate);
  add_common(cmd_bands);
  add_common(cmd_converge);

  CLI::App* cmd_constants =
      app.add_subcommand("constants", "explicit estimate constants for a given nu, C_Korn");
  double nu = 1.0, ckorn = 1.0;
  cmd_constants->add_option("--nu", nu, "two-sided ellipticity constant")->required();
  cmd_constants->add_option("--ckorn", ckorn, "Korn constant")->required();

  CLI11_PARSE(app, argc, argv);

  return guarded([&]() -> int {
    if (cmd_constants->parsed()) {
      std::cout << homb::constants_json(nu, ckorn);
      return 0;
    }

    homb::RunConfig cfg;
    if (!config_path.empty()) cfg = homb::RunConfig::parse_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (workers > 0) cfg.workers = workers;
    if (grid > 0) cfg.grid_n = grid;
    if (cycles >= 0) cfg.cycles = cycles;
    if (!truncation.empty()) cfg.truncation = truncation;
    cfg.check();

    if (cmd_validate->parsed()) {
      const homb::ValidateReport rep = homb::run_validate(cfg, std::cerr);
      std::cout << homb::constants_json(rep.nu, rep.c_korn);
      return rep.pass ? 0 : 1;
    }
    if (cmd_bands->parsed()) {
      (void)homb::run_bands(cfg, std::cerr);
      return 0;
    }
    const homb::ConvergenceReport rep = homb::run_converge(cfg, std::cerr);
    return rep.pass ? 0 : 1;
  });
}
