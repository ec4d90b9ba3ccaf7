#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qkm/curve.hpp"
#include "qkm/spectral.hpp"

namespace qkm {

enum class PairFormula { zhatw, symm, final_form, new_form, all };
enum class OneOneFormula { sw31, symm, all };

const char* to_string(PairFormula f);
const char* to_string(OneOneFormula f);
PairFormula parse_pair_formula(const std::string& name);
OneOneFormula parse_oneone_formula(const std::string& name);

struct FormulaValue {
  std::string formula;
  cplx value;
};

struct CorrelatorValue {
  cplx value;
  std::string formula;
  /// Max pairwise relative deviation among the evaluated formulas (0 for one formula).
  double cross_check_spread = 0.0;
  std::vector<FormulaValue> evaluations;
};

/// Solved spectral data together with everything the correlators reuse:
/// the cover R, the fibres through each eps_k, the alpha roots, the matrix
/// G_kl and the inverse of the Cauchy matrix on (R(alpha), R(eps)).
class SpectralCurve {
 public:
  explicit SpectralCurve(SpectralData data, CurveTolerances tol = {});

  const SpectralData& data() const { return data_; }
  const RationalR& R() const { return R_; }
  double lambda() const { return data_.input.lambda; }
  double coupling() const { return data_.input.coupling(); }
  bool is_free() const { return data_.input.lambda == 0.0; }
  int size() const { return R_.size(); }
  const std::vector<double>& r() const { return data_.input.r; }
  const std::vector<PreimageFan>& eps_fans() const { return eps_fans_; }
  const std::vector<double>& alpha() const { return alpha_.alpha; }
  const Eigen::MatrixXd& G_matrix() const { return G_; }
  const Eigen::MatrixXcd& alpha_eps_inverse() const { return alpha_eps_inverse_; }
  /// Radius below which a needed denominator counts as zero.
  double singular_guard() const { return 1e-10 * R_.scale(); }

 private:
  SpectralData data_;
  RationalR R_;
  std::vector<PreimageFan> eps_fans_;
  AlphaRoots alpha_;
  Eigen::MatrixXd G_;
  Eigen::MatrixXcd alpha_eps_inverse_;
};

/// Planar two-point function G(z, w) in any of its four closed forms.
CorrelatorValue G0_pair(const SpectralCurve& curve, cplx z, cplx w, PairFormula formula = PairFormula::all);

/// G_kl from the closed product formula over the eps fibres.
Eigen::MatrixXd G_matrix(const SpectralData& S);

/// Diagonal two-point function via the alpha roots.
CorrelatorValue G0_diag(const SpectralCurve& curve, cplx z);

/// Planar 1+1-point function G(z|w).
CorrelatorValue G0_oneone(const SpectralCurve& curve, cplx z, cplx w, OneOneFormula formula = OneOneFormula::all);

}  // namespace qkm
