#include "homb/config.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace homb {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Sectioned key = value text with '#' comments.
std::map<std::string, std::string> parse_pairs(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!kv.emplace(full, trim(line.substr(eq + 1))).second)
      throw ConfigError("duplicate key '" + full + "'");
  }
  return kv;
}

class KvReader {
 public:
  explicit KvReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool take(const std::string& key, std::string& out) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return false;
    out = it->second;
    kv_.erase(it);
    return true;
  }

  double take_double(const std::string& key, double fallback) {
    std::string v;
    if (!take(key, v)) return fallback;
    return parse_double(key, v);
  }

  long long take_int(const std::string& key, long long fallback) {
    std::string v;
    if (!take(key, v)) return fallback;
    return parse_int(key, v);
  }

  std::string take_string(const std::string& key, std::string fallback) {
    std::string v;
    if (!take(key, v)) return fallback;
    return v;
  }

  std::vector<double> take_double_list(const std::string& key, std::vector<double> fallback) {
    std::string v;
    if (!take(key, v)) return fallback;
    std::istringstream in(v);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(key, tok));
    return out;
  }

  std::array<int, 3> take_int_triple(const std::string& key, std::array<int, 3> fallback) {
    std::string v;
    if (!take(key, v)) return fallback;
    std::istringstream in(v);
    std::array<int, 3> out{};
    std::string tok;
    for (int i = 0; i < 3; ++i) {
      if (!(in >> tok)) throw ConfigError(key + ": expected three integers");
      out[i] = static_cast<int>(parse_int(key, tok));
    }
    if (in >> tok) throw ConfigError(key + ": expected exactly three integers");
    return out;
  }

  void require_empty() const {
    if (!kv_.empty()) throw ConfigError("unknown key '" + kv_.begin()->first + "'");
  }

 private:
  static double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty())
      throw ConfigError(key + ": not a number: '" + v + "'");
    return x;
  }

  static long long parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty())
      throw ConfigError(key + ": not an integer: '" + v + "'");
    return x;
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  KvReader kv(parse_pairs(text));
  RunConfig cfg;

  cfg.coefficients.preset = kv.take_string("coefficients.preset", cfg.coefficients.preset);
  cfg.coefficients.lambda0 = kv.take_double("coefficients.lambda0", cfg.coefficients.lambda0);
  cfg.coefficients.mu0 = kv.take_double("coefficients.mu0", cfg.coefficients.mu0);
  cfg.coefficients.delta = kv.take_double("coefficients.delta", cfg.coefficients.delta);
  cfg.coefficients.k = kv.take_int_triple("coefficients.k", cfg.coefficients.k);
  cfg.coefficients.lambda1 = kv.take_double("coefficients.lambda1", cfg.coefficients.lambda1);
  cfg.coefficients.mu1 = kv.take_double("coefficients.mu1", cfg.coefficients.mu1);
  cfg.coefficients.lambda2 = kv.take_double("coefficients.lambda2", cfg.coefficients.lambda2);
  cfg.coefficients.mu2 = kv.take_double("coefficients.mu2", cfg.coefficients.mu2);
  cfg.coefficients.width = kv.take_double("coefficients.width", cfg.coefficients.width);
  cfg.coefficients.path = kv.take_string("coefficients.path", cfg.coefficients.path);

  cfg.grid_n = static_cast<int>(kv.take_int("grid.n", cfg.grid_n));

  cfg.solver.cg_tol = kv.take_double("solver.cg_tol", cfg.solver.cg_tol);
  cfg.solver.max_iter = static_cast<int>(kv.take_int("solver.max_iter", cfg.solver.max_iter));
  const std::string precond = kv.take_string(
      "solver.preconditioner", cfg.solver.preconditioner == SolverConfig::Precond::none
                                   ? "none"
                                   : "constant_coefficient");
  if (precond == "none")
    cfg.solver.preconditioner = SolverConfig::Precond::none;
  else if (precond == "constant_coefficient")
    cfg.solver.preconditioner = SolverConfig::Precond::constant_coefficient;
  else
    throw ConfigError("solver.preconditioner: unknown value '" + precond + "'");

  cfg.cycles = static_cast<int>(kv.take_int("cascade.cycles", cfg.cycles));
  cfg.contour_quad_nodes =
      static_cast<int>(kv.take_int("contour.quad_nodes", cfg.contour_quad_nodes));
  cfg.source_seed = static_cast<std::uint64_t>(kv.take_int("source.seed",
                                                           static_cast<long long>(cfg.source_seed)));
  cfg.source_radius = kv.take_double("source.radius", cfg.source_radius);
  cfg.eps_ladder = kv.take_double_list("run.eps", cfg.eps_ladder);
  cfg.truncation = kv.take_string("run.truncation", cfg.truncation);
  cfg.out_dir = kv.take_string("run.out_dir", cfg.out_dir);
  cfg.workers = static_cast<int>(kv.take_int("run.workers", cfg.workers));

  kv.require_empty();
  cfg.check();
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse(buf.str());
  // A relative coefficient file resolves against the config's directory, so a
  // config bundle works from any working directory.
  if (!cfg.coefficients.path.empty()) {
    const std::filesystem::path p(cfg.coefficients.path);
    if (p.is_relative())
      cfg.coefficients.path = (std::filesystem::path(path).parent_path() / p).string();
  }
  return cfg;
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "[coefficients]\n";
  out << "preset = " << coefficients.preset << "\n";
  out << "lambda0 = " << coefficients.lambda0 << "\n";
  out << "mu0 = " << coefficients.mu0 << "\n";
  out << "delta = " << coefficients.delta << "\n";
  out << "k = " << coefficients.k[0] << " " << coefficients.k[1] << " " << coefficients.k[2]
      << "\n";
  out << "lambda1 = " << coefficients.lambda1 << "\n";
  out << "mu1 = " << coefficients.mu1 << "\n";
  out << "lambda2 = " << coefficients.lambda2 << "\n";
  out << "mu2 = " << coefficients.mu2 << "\n";
  out << "width = " << coefficients.width << "\n";
  out << "path = " << coefficients.path << "\n";
  out << "\n[grid]\n";
  out << "n = " << grid_n << "\n";
  out << "\n[solver]\n";
  out << "cg_tol = " << solver.cg_tol << "\n";
  out << "max_iter = " << solver.max_iter << "\n";
  out << "preconditioner = "
      << (solver.preconditioner == SolverConfig::Precond::none ? "none" : "constant_coefficient")
      << "\n";
  out << "\n[cascade]\n";
  out << "cycles = " << cycles << "\n";
  out << "\n[contour]\n";
  out << "quad_nodes = " << contour_quad_nodes << "\n";
  out << "\n[source]\n";
  out << "seed = " << source_seed << "\n";
  out << "radius = " << source_radius << "\n";
  out << "\n[run]\n";
  out << "eps =";
  for (const double e : eps_ladder) out << " " << e;
  out << "\n";
  out << "truncation = " << truncation << "\n";
  out << "out_dir = " << out_dir << "\n";
  out << "workers = " << workers << "\n";
  return out.str();
}

void RunConfig::check() const {
  const std::string& p = coefficients.preset;
  if (p != "isotropic_constant" && p != "isotropic_modulated" && p != "laminate" && p != "file")
    throw ConfigError("coefficients.preset: unknown preset '" + p + "'");
  if (p == "file" && coefficients.path.empty())
    throw ConfigError("coefficients.path required for the file preset");
  if (grid_n < 4 || grid_n % 2 != 0) throw ConfigError("grid.n must be even and >= 4");
  try {
    solver.check();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (cycles < 0 || cycles > 8) throw ConfigError("cascade.cycles must be in [0, 8]");
  if (contour_quad_nodes < 8) throw ConfigError("contour.quad_nodes must be >= 8");
  if (!(source_radius > 0.0)) throw ConfigError("source.radius must be positive");
  if (eps_ladder.empty()) throw ConfigError("run.eps must be nonempty");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0)) throw ConfigError("run.eps entries must be positive");
    if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1]))
      throw ConfigError("run.eps must be strictly decreasing");
  }
  if (truncation != "full" && truncation != "reduced_l2" && truncation != "reduced_h1")
    throw ConfigError("run.truncation: unknown mode '" + truncation + "'");
  if (workers < 1) throw ConfigError("run.workers must be >= 1");
}

ElasticityTensorField build_coefficients(const CoefficientSpec& spec, int grid_n) {
  const CellGrid g(grid_n);
  if (spec.preset == "isotropic_constant")
    return ElasticityTensorField::isotropic_constant(g, spec.lambda0, spec.mu0);
  if (spec.preset == "isotropic_modulated")
    return ElasticityTensorField::isotropic_modulated(g, spec.lambda0, spec.mu0, spec.delta,
                                                      spec.k);
  if (spec.preset == "laminate")
    return ElasticityTensorField::laminate(g, spec.lambda1, spec.mu1, spec.lambda2, spec.mu2,
                                           spec.width);
  if (spec.preset == "file") {
    ElasticityTensorField A = ElasticityTensorField::load(spec.path);
    if (A.grid().n() != grid_n)
      throw ConfigError("coefficient file grid " + std::to_string(A.grid().n()) +
                        " does not match grid.n = " + std::to_string(grid_n));
    return A;
  }
  throw ConfigError("unknown coefficient preset '" + spec.preset + "'");
}

}  // namespace homb
