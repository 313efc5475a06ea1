#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "homb/config.hpp"

using namespace homb;

namespace {

std::filesystem::path data_dir() {
  return std::filesystem::path(__FILE__).parent_path() / "data";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults serialize and round trip byte-identically") {
    const RunConfig def;
    CHECK_NOTHROW(def.check());
    const std::string text = def.serialize();
    const RunConfig back = RunConfig::parse(text);
    CHECK(back.serialize() == text);

    // Empty input is all defaults.
    const RunConfig empty = RunConfig::parse("");
    CHECK(empty.serialize() == text);
    CHECK(empty.grid_n == 16);
    CHECK(empty.cycles == 2);
    CHECK(empty.truncation == "full");
    CHECK(empty.eps_ladder.size() == 5);
  }

  TEST_CASE("a full config parses into every field") {
    const std::string text = R"(
# run description
[coefficients]
preset = laminate      # switch material
lambda1 = 1.5
mu1 = 0.9
lambda2 = 4.0
mu2 = 2.0
width = 0.08

[grid]
n = 8

[solver]
cg_tol = 1e-9
max_iter = 900
preconditioner = none

[cascade]
cycles = 3

[contour]
quad_nodes = 48

[source]
seed = 99
radius = 0.5

[run]
eps = 0.25 0.125 0.0625
truncation = reduced_l2
out_dir = results/run1
workers = 3
)";
    const RunConfig cfg = RunConfig::parse(text);
    CHECK(cfg.coefficients.preset == "laminate");
    CHECK(cfg.coefficients.lambda1 == 1.5);
    CHECK(cfg.coefficients.mu1 == 0.9);
    CHECK(cfg.coefficients.width == 0.08);
    CHECK(cfg.grid_n == 8);
    CHECK(cfg.solver.cg_tol == 1e-9);
    CHECK(cfg.solver.max_iter == 900);
    CHECK(cfg.solver.preconditioner == SolverConfig::Precond::none);
    CHECK(cfg.cycles == 3);
    CHECK(cfg.contour_quad_nodes == 48);
    CHECK(cfg.source_seed == 99);
    CHECK(cfg.source_radius == 0.5);
    CHECK(cfg.eps_ladder == std::vector<double>{0.25, 0.125, 0.0625});
    CHECK(cfg.truncation == "reduced_l2");
    CHECK(cfg.out_dir == "results/run1");
    CHECK(cfg.workers == 3);

    const RunConfig back = RunConfig::parse(cfg.serialize());
    CHECK(back.serialize() == cfg.serialize());
  }

  TEST_CASE("malformed text is rejected") {
    CHECK_THROWS_AS(RunConfig::parse("[grid]\nn = 8\nn = 16\n"), ConfigError);   // duplicate
    CHECK_THROWS_AS(RunConfig::parse("[grid\nn = 8\n"), ConfigError);            // bad section
    CHECK_THROWS_AS(RunConfig::parse("[]\n"), ConfigError);                      // empty section
    CHECK_THROWS_AS(RunConfig::parse("justaline\n"), ConfigError);               // no equals
    CHECK_THROWS_AS(RunConfig::parse("= 3\n"), ConfigError);                     // empty key
    CHECK_THROWS_AS(RunConfig::parse("[grid]\nn = eight\n"), ConfigError);       // bad int
    CHECK_THROWS_AS(RunConfig::parse("[coefficients]\ndelta = 0.3x\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[coefficients]\nk = 1 0\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[coefficients]\nk = 1 0 0 0\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[grid]\nsize = 8\n"), ConfigError);        // unknown key
    CHECK_THROWS_AS(RunConfig::parse("[solver]\npreconditioner = jacobi\n"), ConfigError);
  }

  TEST_CASE("range validation") {
    CHECK_THROWS_AS(RunConfig::parse("[coefficients]\npreset = granite\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[coefficients]\npreset = file\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[grid]\nn = 7\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[grid]\nn = 2\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[solver]\ncg_tol = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[cascade]\ncycles = 9\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[cascade]\ncycles = -1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[contour]\nquad_nodes = 4\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[source]\nradius = 0\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[run]\neps = 0.1 0.2\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[run]\neps = 0.1 -0.05\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[run]\ntruncation = tight\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[run]\nworkers = 0\n"), ConfigError);
  }

  TEST_CASE("parse_file and relative coefficient paths") {
    CHECK_THROWS_AS(RunConfig::parse_file("no/such/file.cfg"), ConfigError);

    const RunConfig cfg = RunConfig::parse_file((data_dir() / "corrupt.cfg").string());
    CHECK(cfg.coefficients.preset == "file");
    // The relative path was rebased onto the config directory.
    CHECK(std::filesystem::path(cfg.coefficients.path).parent_path() == data_dir());
    CHECK(std::filesystem::exists(cfg.coefficients.path));

    // The referenced coefficient file fails the symmetry audit on load.
    CHECK_THROWS_AS(build_coefficients(cfg.coefficients, cfg.grid_n), SymmetryViolation);
  }

  TEST_CASE("coefficient dispatch") {
    RunConfig cfg;
    cfg.coefficients.preset = "isotropic_constant";
    cfg.coefficients.lambda0 = 1.1;
    cfg.coefficients.mu0 = 0.9;
    const ElasticityTensorField A = build_coefficients(cfg.coefficients, 4);
    CHECK(A.grid().n() == 4);
    CHECK(A.component(0, 0, 0, 0, 0) == doctest::Approx(1.1 + 1.8).epsilon(1e-15));

    cfg.coefficients.preset = "isotropic_modulated";
    CHECK(build_coefficients(cfg.coefficients, 8).description().find("IsotropicModulated") !=
          std::string::npos);
    cfg.coefficients.preset = "laminate";
    CHECK(build_coefficients(cfg.coefficients, 8).description().find("Laminate") !=
          std::string::npos);

    // A valid coefficient file loads through the file preset; a grid mismatch
    // is a configuration error.
    const CellGrid g(4);
    const ElasticityTensorField src = ElasticityTensorField::isotropic_constant(g, 1.0, 1.0);
    const std::string path = "config_dispatch_coeffs.dat";
    {
      std::ofstream out(path);
      out.precision(17);
      out << g.n() << "\n";
      for (std::size_t m = 0; m < g.num_nodes(); ++m)
        for (int c = 0; c < 81; ++c)
          out << src.components()[std::size_t(c) * g.num_nodes() + m] << (c == 80 ? "\n" : " ");
    }
    cfg.coefficients.preset = "file";
    cfg.coefficients.path = path;
    const ElasticityTensorField B = build_coefficients(cfg.coefficients, 4);
    CHECK(B.has_certificate());
    CHECK_THROWS_AS(build_coefficients(cfg.coefficients, 8), ConfigError);
    std::remove(path.c_str());
  }
}
