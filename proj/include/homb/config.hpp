#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "homb/coefficients.hpp"
#include "homb/fiber_operator.hpp"

namespace homb {

// Coefficient selection: one of the built-in presets or a component file.
struct CoefficientSpec {
  std::string preset = "isotropic_modulated";
  double lambda0 = 1.0;
  double mu0 = 1.0;
  double delta = 0.3;              // isotropic_modulated contrast
  std::array<int, 3> k = {1, 0, 0};  // isotropic_modulated wavevector
  double lambda1 = 1.0, mu1 = 1.0;   // laminate phase 1
  double lambda2 = 4.0, mu2 = 2.0;   // laminate phase 2
  double width = 0.05;               // laminate mollification width
  std::string path;                  // preset = file
};

// One batch run. Parses from / serializes to a sectioned key = value file;
// the round trip parse(serialize()) is lossless.
struct RunConfig {
  CoefficientSpec coefficients;
  int grid_n = 16;
  SolverConfig solver;
  int cycles = 2;
  int contour_quad_nodes = 64;
  std::uint64_t source_seed = 7;
  double source_radius = 1.0;
  std::vector<double> eps_ladder = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  std::string truncation = "full";
  std::string out_dir = "out";
  int workers = 1;

  static RunConfig parse(const std::string& text);
  static RunConfig parse_file(const std::string& path);
  std::string serialize() const;

  void check() const;  // throws ConfigError on out-of-range fields
};

// Materializes the coefficient field on an n^3 grid. A file preset must match
// the requested grid.
ElasticityTensorField build_coefficients(const CoefficientSpec& spec, int grid_n);

}  // namespace homb
