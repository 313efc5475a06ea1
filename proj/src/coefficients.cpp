#include "homb/coefficients.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace homb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Isotropic coefficient in storage form: T_ijkl = mu (d_ik d_jl + d_il d_jk)
// + lambda d_ij d_kl, so (A xi) = 2 mu sym(xi) + lambda tr(xi) I on symmetric
// xi.
double isotropic_entry(int i, int j, int k, int l, double lambda, double mu) {
  double v = 0.0;
  if (i == k && j == l) v += mu;
  if (i == l && j == k) v += mu;
  if (i == j && k == l) v += lambda;
  return v;
}

std::vector<double> expand_pointwise_isotropic(const CellGrid& g,
                                               const std::vector<double>& lambda,
                                               const std::vector<double>& mu) {
  const std::size_t N = g.num_nodes();
  std::vector<double> comps(81 * N);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double* dst = comps.data() + ElasticityTensorField::comp_index(i, j, k, l) * N;
          const double cmu = isotropic_entry(i, j, k, l, 0.0, 1.0);
          const double clam = isotropic_entry(i, j, k, l, 1.0, 0.0);
          for (std::size_t m = 0; m < N; ++m) dst[m] = cmu * mu[m] + clam * lambda[m];
        }
  return comps;
}

}  // namespace

Mat3 sym_basis_matrix(int a) {
  Mat3 E = Mat3::Zero();
  if (a < 3) {
    E(a, a) = 1.0;
  } else {
    static const int oi[3] = {1, 0, 0};
    static const int oj[3] = {2, 2, 1};
    const double s = 1.0 / std::sqrt(2.0);
    E(oi[a - 3], oj[a - 3]) = s;
    E(oj[a - 3], oi[a - 3]) = s;
  }
  return E;
}

ElasticityTensorField ElasticityTensorField::isotropic_constant(const CellGrid& g, double lambda,
                                                                double mu) {
  const std::size_t N = g.num_nodes();
  std::vector<double> lam(N, lambda), muv(N, mu);
  std::ostringstream d;
  d << "IsotropicConstant(lambda=" << lambda << ",mu=" << mu << ")";
  ElasticityTensorField A(g, expand_pointwise_isotropic(g, lam, muv), d.str());
  validate(A);
  return A;
}

ElasticityTensorField ElasticityTensorField::isotropic_modulated(const CellGrid& g, double lambda0,
                                                                 double mu0, double delta,
                                                                 const std::array<int, 3>& k) {
  if (std::abs(delta) >= 1.0) throw InvalidInput("modulation depth must satisfy |delta| < 1");
  for (int kj : k)
    if (std::abs(kj) > g.n() / 2 - 1)
      throw InvalidInput("modulation wavevector not resolved by the grid");
  const std::size_t N = g.num_nodes();
  std::vector<double> lam(N), muv(N);
  for (std::size_t m = 0; m < N; ++m) {
    const Vec3 y = g.node_coord(m);
    const double f = 1.0 + delta * std::cos(kTwoPi * (k[0] * y(0) + k[1] * y(1) + k[2] * y(2)));
    lam[m] = lambda0 * f;
    muv[m] = mu0 * f;
  }
  std::ostringstream d;
  d << "IsotropicModulated(lambda0=" << lambda0 << ",mu0=" << mu0 << ",delta=" << delta << ",k=["
    << k[0] << "," << k[1] << "," << k[2] << "])";
  ElasticityTensorField A(g, expand_pointwise_isotropic(g, lam, muv), d.str());
  validate(A);
  return A;
}

ElasticityTensorField ElasticityTensorField::laminate(const CellGrid& g, double lambda1,
                                                      double mu1, double lambda2, double mu2,
                                                      double width) {
  if (width <= 0.0) throw InvalidInput("laminate smoothing width must be positive");
  const int n = g.n();
  const int M = n / 2 - 1;
  // Gaussian-mollified square wave in y1, band-limited to the grid: phi ~ 1 on
  // (0,1/2), ~ 0 on (1/2,1). Exactly a trig polynomial, so spectrally exact.
  auto phi = [&](double y) {
    double s = 0.5;
    for (int m = 1; m <= M; m += 2) {
      const double damp = std::exp(-2.0 * std::numbers::pi * std::numbers::pi * width * width *
                                   double(m) * double(m));
      s += (2.0 / (std::numbers::pi * m)) * damp * std::sin(kTwoPi * m * y);
    }
    return s;
  };
  const std::size_t N = g.num_nodes();
  std::vector<double> lam(N), muv(N);
  for (std::size_t m = 0; m < N; ++m) {
    const double p = phi(g.node_coord(m)(0));
    lam[m] = lambda2 + (lambda1 - lambda2) * p;
    muv[m] = mu2 + (mu1 - mu2) * p;
  }
  std::ostringstream d;
  d << "Laminate(lambda1=" << lambda1 << ",mu1=" << mu1 << ",lambda2=" << lambda2
    << ",mu2=" << mu2 << ",width=" << width << ")";
  ElasticityTensorField A(g, expand_pointwise_isotropic(g, lam, muv), d.str());
  validate(A);
  return A;
}

ElasticityTensorField ElasticityTensorField::from_components(const CellGrid& g,
                                                             std::vector<double> comps,
                                                             std::string description) {
  if (comps.size() != 81 * g.num_nodes()) throw InvalidInput("component array size mismatch");
  return ElasticityTensorField(g, std::move(comps), std::move(description));
}

ElasticityTensorField ElasticityTensorField::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open coefficient file: " + path);
  int n = 0;
  if (!(in >> n)) throw InvalidInput("coefficient file: missing n_per_axis header");
  CellGrid g(n);
  std::vector<double> comps_node_major(81 * g.num_nodes());
  for (double& v : comps_node_major)
    if (!(in >> v)) throw InvalidInput("coefficient file: truncated component data");
  // File stores 81 components per node; internal layout is component-major.
  const std::size_t N = g.num_nodes();
  std::vector<double> comps(81 * N);
  for (std::size_t m = 0; m < N; ++m)
    for (std::size_t c = 0; c < 81; ++c) comps[c * N + m] = comps_node_major[m * 81 + c];
  ElasticityTensorField A(g, std::move(comps), "custom:" + path);
  validate(A);
  return A;
}

Mat6 ElasticityTensorField::mandel_matrix(std::size_t node) const {
  Mat6 M;
  for (int b = 0; b < 6; ++b) {
    const Mat3 Eb = sym_basis_matrix(b);
    Mat3 AEb = Mat3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) acc += component(i, j, k, l, node) * Eb(k, l);
        AEb(i, j) = acc;
      }
    for (int a = 0; a < 6; ++a) M(a, b) = (AEb.array() * sym_basis_matrix(a).array()).sum();
  }
  return M;
}

Mat3c ElasticityTensorField::contract(std::size_t node, const Mat3c& xi) const {
  Mat3c out = Mat3c::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) acc += component(i, j, k, l, node) * xi(k, l);
      out(i, j) = acc;
    }
  return out;
}

std::array<double, 81> ElasticityTensorField::mean_components() const {
  const std::size_t N = grid_.num_nodes();
  std::array<double, 81> out{};
  for (std::size_t c = 0; c < 81; ++c)
    out[c] = pairwise_sum(std::span<const double>(comps_.data() + c * N, N)) / double(N);
  return out;
}

double ElasticityTensorField::nu() const {
  const auto& c = certificate();
  return std::min(c.nu_measured, 1.0 / c.nu_upper);
}

EllipticityCertificate validate(ElasticityTensorField& A) {
  const std::size_t N = A.grid_.num_nodes();
  // Exact symmetry audit of the two generating identities.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double* t = A.comps_.data() + ElasticityTensorField::comp_index(i, j, k, l) * N;
          const double* left = A.comps_.data() + ElasticityTensorField::comp_index(j, i, k, l) * N;
          const double* major = A.comps_.data() + ElasticityTensorField::comp_index(k, l, i, j) * N;
          for (std::size_t m = 0; m < N; ++m) {
            if (t[m] != left[m] || t[m] != major[m])
              throw SymmetryViolation("coefficient symmetry violated at node " + std::to_string(m));
            if (!std::isfinite(t[m])) throw InvalidInput("non-finite coefficient component");
          }
        }
  EllipticityCertificate cert;
  cert.symmetric = true;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat6> es;
  for (std::size_t m = 0; m < N; ++m) {
    es.compute(A.mandel_matrix(m), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues()(0));
    hi = std::max(hi, es.eigenvalues()(5));
  }
  cert.nu_measured = lo;
  cert.nu_upper = hi;
  if (!(cert.nu_measured > 0.0))
    throw NotElliptic("coefficient not uniformly elliptic: min eigenvalue " + std::to_string(lo));
  A.cert_ = cert;
  return cert;
}

StrainField apply_pointwise(const ElasticityTensorField& A, const StrainField& s) {
  require_same_grid(A.grid(), s.grid());
  const std::size_t N = A.grid().num_nodes();
  StrainField out(s.grid());
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      std::vector<cplx> acc(N, cplx(0));
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double* t = A.components().data() + ElasticityTensorField::comp_index(i, j, k, l) * N;
          const cplx* skl = s.data().data() + (3 * k + l) * N;
          for (std::size_t m = 0; m < N; ++m) acc[m] += t[m] * skl[m];
        }
      for (std::size_t m = 0; m < N; ++m) out.set_sym(i, j, m, acc[m]);
    }
  return out;
}

}  // namespace homb
