#include "qkm/cauchy.hpp"

#include <algorithm>
#include <sstream>

namespace qkm {

namespace {

using Nodes = std::vector<cplx>;

// prod_i (x - nodes_i), optionally skipping one index.
cplx node_poly(const Nodes& nodes, cplx x, int skip = -1) {
  std::vector<cplx> f;
  f.reserve(nodes.size());
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    if (i != skip) f.push_back(x - nodes[static_cast<std::size_t>(i)]);
  return balanced_product(f);
}

// A'(a_l) as the leave-one-out product.
cplx node_poly_derivative(const Nodes& nodes, int l) { return node_poly(nodes, nodes[static_cast<std::size_t>(l)], l); }

// Lagrange basis polynomial A_l(x) = prod_{i != l} (x - a_i) / (a_l - a_i).
cplx lagrange(const Nodes& nodes, int l, cplx x) { return node_poly(nodes, x, l) / node_poly_derivative(nodes, l); }

}  // namespace

double CauchyNodes::scale() const {
  double s = 1.0;
  for (cplx v : a) s = std::max(s, std::abs(v));
  for (cplx v : b) s = std::max(s, std::abs(v));
  return s;
}

void CauchyNodes::validate() const {
  if (a.empty() || a.size() != b.size()) throw Error(ErrorKind::NodeCollision, "node lists must be nonempty and of equal length");
  const double sep = 1e-12 * scale();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(a[i] - a[j]) <= sep) throw Error(ErrorKind::NodeCollision, "a-nodes coincide");
      if (std::abs(b[i] - b[j]) <= sep) throw Error(ErrorKind::NodeCollision, "b-nodes coincide");
    }
    for (std::size_t j = 0; j < b.size(); ++j)
      if (std::abs(a[i] - b[j]) <= sep) throw Error(ErrorKind::NodeCollision, "an a-node coincides with a b-node");
  }
}

std::vector<std::string> CauchyNodes::conditioning_warnings() const {
  std::vector<std::string> out;
  const double guard = 1e-6 * scale();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (std::abs(a[i] - b[j]) < guard) {
        std::ostringstream msg;
        msg << "|a_" << i << " - b_" << j << "| = " << std::abs(a[i] - b[j]) << " below conditioning guard";
        out.push_back(msg.str());
      }
  return out;
}

double SchechterReport::max_residual() const {
  return std::max({interpolation_rows, interpolation_cols, residue_a, residue_b});
}

Eigen::MatrixXcd cauchy_matrix(const CauchyNodes& nodes) {
  const int d = nodes.size();
  Eigen::MatrixXcd H(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) H(k, l) = 1.0 / (nodes.a[static_cast<std::size_t>(k)] - nodes.b[static_cast<std::size_t>(l)]);
  return H;
}

CauchyInverse cauchy_inverse(const CauchyNodes& nodes) {
  nodes.validate();
  const int d = nodes.size();
  CauchyInverse inv{nodes, Eigen::MatrixXcd(d, d), nodes.conditioning_warnings()};
  for (int k = 0; k < d; ++k) {
    const cplx bk = nodes.b[static_cast<std::size_t>(k)];
    for (int l = 0; l < d; ++l) {
      const cplx al = nodes.a[static_cast<std::size_t>(l)];
      inv.entries(k, l) = (al - bk) * lagrange(nodes.a, l, bk) * lagrange(nodes.b, k, al);
    }
  }
  return inv;
}

CauchySums cauchy_sums(const CauchyNodes& nodes) {
  nodes.validate();
  const int d = nodes.size();
  CauchySums sums;
  for (int k = 0; k < d; ++k) {
    const cplx bk = nodes.b[static_cast<std::size_t>(k)];
    sums.row.push_back(-node_poly(nodes.a, bk) / node_poly_derivative(nodes.b, k));
  }
  for (int l = 0; l < d; ++l) {
    const cplx al = nodes.a[static_cast<std::size_t>(l)];
    sums.col.push_back(node_poly(nodes.b, al) / node_poly_derivative(nodes.a, l));
  }
  return sums;
}

SchechterReport verify_schechter(const CauchyNodes& nodes, cplx x) {
  const CauchyInverse inv = cauchy_inverse(nodes);
  const int d = nodes.size();
  const double sep = 1e-12 * nodes.scale();
  for (int i = 0; i < d; ++i)
    if (std::abs(x - nodes.a[static_cast<std::size_t>(i)]) <= sep || std::abs(x - nodes.b[static_cast<std::size_t>(i)]) <= sep)
      throw Error(ErrorKind::NodeCollision, "evaluation point coincides with a node");

  SchechterReport rep;
  rep.warnings = inv.warnings;
  const cplx Ax = node_poly(nodes.a, x);
  const cplx Bx = node_poly(nodes.b, x);
  for (int k = 0; k < d; ++k) {
    const cplx bk = nodes.b[static_cast<std::size_t>(k)];
    const cplx lhs = lagrange(nodes.b, k, x) * node_poly(nodes.a, bk) / Ax;
    cplx rhs = 0.0;
    for (int l = 0; l < d; ++l) rhs += inv.entries(k, l) / (nodes.a[static_cast<std::size_t>(l)] - x);
    rep.interpolation_rows = std::max(rep.interpolation_rows, relative_residual(lhs, rhs));
  }
  for (int l = 0; l < d; ++l) {
    const cplx al = nodes.a[static_cast<std::size_t>(l)];
    const cplx lhs = lagrange(nodes.a, l, x) * node_poly(nodes.b, al) / Bx;
    cplx rhs = 0.0;
    for (int k = 0; k < d; ++k) rhs += inv.entries(k, l) / (x - nodes.b[static_cast<std::size_t>(k)]);
    rep.interpolation_cols = std::max(rep.interpolation_cols, relative_residual(lhs, rhs));
  }
  for (int j = 0; j < d; ++j) {
    const cplx aj = nodes.a[static_cast<std::size_t>(j)];
    const cplx bj = nodes.b[static_cast<std::size_t>(j)];
    cplx sum_a = 0.0;
    cplx sum_b = 0.0;
    for (int k = 0; k < d; ++k) {
      const cplx bk = nodes.b[static_cast<std::size_t>(k)];
      sum_a += node_poly(nodes.a, bk) / ((bk - aj) * node_poly_derivative(nodes.b, k));
      const cplx ak = nodes.a[static_cast<std::size_t>(k)];
      sum_b += node_poly(nodes.b, ak) / ((ak - bj) * node_poly_derivative(nodes.a, k));
    }
    rep.residue_a = std::max(rep.residue_a, relative_residual(sum_a, 1.0));
    rep.residue_b = std::max(rep.residue_b, relative_residual(sum_b, 1.0));
  }
  return rep;
}

}  // namespace qkm
