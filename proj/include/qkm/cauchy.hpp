#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qkm/types.hpp"

namespace qkm {

// Node sets of the Cauchy matrix H_kl = 1 / (a_k - b_l).
struct CauchyNodes {
  std::vector<cplx> a;
  std::vector<cplx> b;

  int size() const { return static_cast<int>(a.size()); }
  /// max(1, largest node modulus)
  double scale() const;
  /// Throws NodeCollision if two a's, two b's, or an (a, b) pair are closer than 1e-12 * scale.
  void validate() const;
  /// Nonempty when some |a_i - b_j| < 1e-6 * scale.
  std::vector<std::string> conditioning_warnings() const;
};

struct CauchyInverse {
  CauchyNodes nodes;
  Eigen::MatrixXcd entries;
  std::vector<std::string> warnings;
};

struct CauchySums {
  std::vector<cplx> row;
  std::vector<cplx> col;
};

struct SchechterReport {
  double interpolation_rows = 0.0;  // first identity, max over k
  double interpolation_cols = 0.0;  // second identity, max over l
  double residue_a = 0.0;           // sum over k equals 1, max over j
  double residue_b = 0.0;           // sum over l equals 1, max over j
  std::vector<std::string> warnings;

  double max_residual() const;
};

Eigen::MatrixXcd cauchy_matrix(const CauchyNodes& nodes);

/// (H^{-1})_{kl} = (a_l - b_k) A_l(b_k) B_k(a_l) with Lagrange basis polynomials A_l, B_k.
CauchyInverse cauchy_inverse(const CauchyNodes& nodes);

/// Closed-form row sums -A(b_k)/B'(b_k) and column sums B(a_l)/A'(a_l).
CauchySums cauchy_sums(const CauchyNodes& nodes);

SchechterReport verify_schechter(const CauchyNodes& nodes, cplx x);

}  // namespace qkm
