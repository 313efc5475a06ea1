#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homb/cell_grid.hpp"

namespace homb {

using Mat6 = Eigen::Matrix<double, 6, 6>;

// Orthonormal (Frobenius) basis of Sym(3): a = 0,1,2 are e_a x e_a; a = 3,4,5
// are (e_i x e_j + e_j x e_i)/sqrt(2) for (i,j) = (2,3),(1,3),(1,2) in
// 1-based labels.
Mat3 sym_basis_matrix(int a);

// Result of running the ellipticity/symmetry audit over every node.
// nu_measured is the smallest eigenvalue of the tensor acting on symmetric
// matrices (Mandel 6x6) over all nodes, nu_upper the largest. The two-sided
// constant used by analytic estimates is min(nu_measured, 1/nu_upper).
struct EllipticityCertificate {
  double nu_measured = 0.0;
  double nu_upper = 0.0;
  bool symmetric = false;
};

// Periodic fourth-order elasticity coefficient field A(y) stored nodally in
// full 81-component form. Storage convention: component(i,j,k,l) is the
// coefficient T with (A xi)_{ij} = sum_{kl} T_{ijkl} xi_{kl}. The material
// symmetries read T_{ijkl} = T_{jikl} = T_{klij} (right-minor symmetry
// follows), all components real.
class ElasticityTensorField {
 public:
  static ElasticityTensorField isotropic_constant(const CellGrid& g, double lambda, double mu);
  static ElasticityTensorField isotropic_modulated(const CellGrid& g, double lambda0, double mu0,
                                                   double delta, const std::array<int, 3>& k);
  static ElasticityTensorField laminate(const CellGrid& g, double lambda1, double mu1,
                                        double lambda2, double mu2, double width);
  // Raw construction from a component array (layout comp*N + node with
  // comp = ((i*3+j)*3+k)*3+l). Performs no validation; call validate() to
  // certify before use in solvers.
  static ElasticityTensorField from_components(const CellGrid& g, std::vector<double> comps,
                                               std::string description);
  // Text file: first token n_per_axis, then 81 floats per node in
  // lexicographic node order (component index fastest). Validates.
  static ElasticityTensorField load(const std::string& path);

  const CellGrid& grid() const { return grid_; }
  const std::string& description() const { return description_; }

  double component(int i, int j, int k, int l, std::size_t node) const {
    return comps_[comp_index(i, j, k, l) * grid_.num_nodes() + node];
  }
  const std::vector<double>& components() const { return comps_; }

  static std::size_t comp_index(int i, int j, int k, int l) {
    return static_cast<std::size_t>(((i * 3 + j) * 3 + k) * 3 + l);
  }

  // Mandel-basis 6x6 matrix of A(y_m) on symmetric matrices; eigenvalues are
  // exactly the operator eigenvalues under the Frobenius inner product.
  Mat6 mandel_matrix(std::size_t node) const;

  // Single-node contraction, used to build per-mode symbols.
  Mat3c contract(std::size_t node, const Mat3c& xi) const;

  // Node-mean of every component (deterministic pairwise reduction).
  std::array<double, 81> mean_components() const;

  // Certificate from the most recent validation; presets and load() validate
  // at construction.
  const EllipticityCertificate& certificate() const {
    if (!cert_) throw InvalidInput("tensor has not been validated");
    return *cert_;
  }
  bool has_certificate() const { return cert_.has_value(); }
  // Two-sided ellipticity constant min(nu_measured, 1/nu_upper).
  double nu() const;

  friend EllipticityCertificate validate(ElasticityTensorField& A);

 private:
  ElasticityTensorField(const CellGrid& g, std::vector<double> comps, std::string description)
      : grid_(g), comps_(std::move(comps)), description_(std::move(description)) {}

  CellGrid grid_;
  std::vector<double> comps_;  // layout comp*N + node
  std::string description_;
  std::optional<EllipticityCertificate> cert_;
};

// Exact index-symmetry check plus Mandel eigenvalue scan over all nodes.
// Stores the certificate on A and returns it. Throws SymmetryViolation if any
// node breaks T_{ijkl} = T_{jikl} or T_{ijkl} = T_{klij} exactly, NotElliptic
// if nu_measured <= 0.
EllipticityCertificate validate(ElasticityTensorField& A);

// Nodewise contraction (A s)_{ij} = sum_{kl} T_{ijkl} s_{kl}. Output is
// symmetric because of the index symmetries.
StrainField apply_pointwise(const ElasticityTensorField& A, const StrainField& s);

}  // namespace homb
