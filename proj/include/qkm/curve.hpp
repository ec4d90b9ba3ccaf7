#pragma once

#include <vector>

#include "qkm/types.hpp"

namespace qkm {

/// Guard radii used by the curve and everything built on it. Each value is
/// multiplied by the curve's scale = max(1, max_k E_k) before use.
struct CurveTolerances {
  double pole_guard = 1e-13;
  double degenerate_fiber = 1e-8;
  double base_match = 1e-8;
  double root_residual = 1e-9;
  double track_ambiguity = 1e-6;
  double real_axis = 1e-10;
};

/// The degree-(d+1) cover R(z) = z - coupling * sum_k rho_k / (eps_k + z).
///
/// Poles sit at -eps_k and at infinity. `coupling` is lambda / N.
class RationalR {
 public:
  RationalR(std::vector<double> eps, std::vector<double> rho, double coupling, double scale = 1.0,
            CurveTolerances tol = {});

  int size() const { return static_cast<int>(eps_.size()); }
  const std::vector<double>& eps() const { return eps_; }
  const std::vector<double>& rho() const { return rho_; }
  double coupling() const { return coupling_; }
  double scale() const { return scale_; }
  const CurveTolerances& tolerances() const { return tol_; }
  /// Indices of eps in ascending order of eps.
  const std::vector<int>& ascending() const { return ascending_; }

  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;

  /// (R(z) - R(w)) / (z - w), continued to R'(z) on the diagonal.
  cplx divided_difference(cplx z, cplx w) const;
  /// R(z) - R(w) evaluated as (z - w) * divided_difference(z, w), free of cancellation.
  cplx difference(cplx z, cplx w) const;
  /// (R(z) - R(-z)) * prod_k (R(z) - R(eps_k)), finite at z = eps_k.
  cplx odd_eps_product(cplx z) const;

  /// Throws PoleHit if z lies within the pole guard of some -eps_k.
  void require_regular(cplx z) const;

 private:
  std::vector<double> eps_;
  std::vector<double> rho_;
  double coupling_;
  double scale_;
  CurveTolerances tol_;
  std::vector<int> ascending_;
};

/// Principal point u of a fibre R^{-1}(R(u)) together with the d other roots.
/// hats[k] is the root that tends to -eps_k as the coupling goes to zero.
struct PreimageFan {
  cplx base;
  std::vector<cplx> hats;
  cplx value;
  /// Set when complex continuation saw two tracked roots closer than the
  /// ambiguity radius; the labels then come from nearest matching only.
  bool ordering_ambiguous = false;
};

/// Positive roots alpha_k of R(z) - R(-z), ascending.
struct AlphaRoots {
  std::vector<double> alpha;
};

cplx eval_R(const RationalR& R, cplx z);
cplx eval_R_prime(const RationalR& R, cplx z);

/// All d+1 solutions of R(z) = v (companion-matrix eigenvalues plus Newton polish).
std::vector<cplx> preimages(const RationalR& R, cplx v);

/// Fibre through u with branch-ordered hats. At zero coupling returns the
/// exact limit fan (hats = -eps_k).
PreimageFan hat_fan(const RationalR& R, cplx u);

/// Fibre through u with hats matched to the nearest -eps_k, no continuation.
/// Enough for expressions symmetric in the hats.
PreimageFan fibre(const RationalR& R, cplx u);

AlphaRoots alpha_roots(const RationalR& R);

/// |lhs - rhs| / max(1, |lhs|) for R(z) - R(u) = (z - u) prod_k (z - hat_k)/(z + eps_k).
double check_factorization(const RationalR& R, cplx u, cplx z);
double check_factorization(const RationalR& R, const PreimageFan& fan, cplx z);

/// (-eps_k - u) prod_l (-eps_k - hat_l) / prod_{j != k} (eps_j - eps_k); equals -coupling * rho_k.
cplx fan_residue(const RationalR& R, const PreimageFan& fan, int k);

}  // namespace qkm
