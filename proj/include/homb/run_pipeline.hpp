#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "homb/cascade.hpp"
#include "homb/config.hpp"
#include "homb/fullspace.hpp"

namespace homb {

// Runs fn(0..nitems-1) on up to `workers` threads over a shared work queue.
// The first exception thrown by any item is rethrown after all threads join.
// Item outputs must go to preassigned slots so results are order-independent.
void parallel_for(int nitems, int workers, const std::function<void(int)>& fn);

// Sweep used by bands/contour runs: axis, face-diagonal, body-diagonal, and
// one low-symmetry direction, each over a geometric radius ladder below pi.
std::vector<Vec3> default_chi_sweep();

struct ValidateReport {
  std::string description;
  int grid_n = 0;
  EllipticityCertificate cert;
  double nu = 0.0;  // min(nu_measured, 1/nu_upper)
  double c_korn = 0.0;
  PaperConstants constants{};
  bool pass = false;
};

// Coefficient audit + Korn constant + the explicit estimate constants.
// Writes out_dir/certificate.json.
ValidateReport run_validate(const RunConfig& cfg, std::ostream& log);

// chi sweep, eigenvalue families, contour bisection. Writes out_dir/bands.csv
// and out_dir/contour.json.
Contour run_bands(const RunConfig& cfg, std::ostream& log);

// Full convergence study at the resolvent point -1: exact vs expanded fibers
// over the eps ladder for every cycle count n <= cfg.cycles. Writes
// out_dir/report.json, out_dir/points.csv, out_dir/plot.dat.
ConvergenceReport run_converge(const RunConfig& cfg, std::ostream& log);

// JSON text of the explicit constants at a given (nu, C_Korn).
std::string constants_json(double nu, double c_korn);

}  // namespace homb
