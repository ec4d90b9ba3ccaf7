#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qkm/correlators.hpp"
#include "qkm/report.hpp"
#include "qkm/series_jet.hpp"

namespace qkm {

/// Deterministic sample points for the residual suites.
struct Sampler {
  explicit Sampler(std::uint64_t seed);

  /// z with Re z in [0.2, 2 scale], Im z in [-scale, scale].
  cplx regular(const SpectralCurve& C);
  /// E_a + t with |t| below a fifth of the smallest gap among {0, E_1, ..., E_d}.
  cplx near_E(const SpectralCurve& C, int a);
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 rng_;
};

/// Principal preimage R^{-1}(zeta): the root of largest real part, required in Re > 0.
cplx principal_inverse(const SpectralCurve& C, cplx zeta);

/// Holomorphic two-point equation in (zeta, eta), with G(zeta, eta) = G(R^{-1} zeta, R^{-1} eta).
double residual_GZW(const SpectralCurve& C, cplx zeta, cplx eta);
/// The lattice equation at every (a, b).
ResidualReport residual_2pt(const SpectralCurve& C);
double residual_ansatz_vii(const SpectralCurve& C, cplx z);
double residual_fractions(const SpectralCurve& C, cplx w);
/// Functional equation of the 1+1-point function.
double residual_G11_functional(const SpectralCurve& C, cplx z, cplx w);
/// The d equations obtained at z = alpha_k, max over k.
double residual_G11_alpha(const SpectralCurve& C, cplx w);
/// Corollary for G(eps_k, w): -c r_k G(eps_k, w) against the product over hats, max over k.
double residual_eps_hat(const SpectralCurve& C, cplx w);
/// Partial-fraction identity with index 0 prepended; lhs must equal 1.
double residual_identity(const SpectralCurve& C, cplx z, cplx w);

using JetMatrix = std::vector<std::vector<SeriesJet>>;

/// Order-by-order lambda-series of G_kl from the lattice equation alone.
/// The k = a difference quotient is resolved by expanding G(E_a + t, E_b)
/// in t alongside lambda, so the oracle never touches the closed forms.
JetMatrix series_2pt_iterative(const ModelInput& input, int K);

/// lambda-series of G_kl from the spectral jets and the closed product formula.
JetMatrix series_2pt_closed(const ModelInput& input, int K);

struct SeriesCorruption {
  int k = 0;
  int l = 0;
  int order = 1;
  double delta = 0.0;
};

/// Max over (k, l) and orders <= K of |closed - oracle| / max(1, |oracle|).
ResidualReport compare_series(const ModelInput& input, int K, const SeriesCorruption& corrupt = {});

struct SuiteOptions {
  int samples = 20;
  std::uint64_t seed = 1;
};

/// Every residual family on one solved instance.
std::vector<ResidualReport> residual_suite(const SpectralCurve& C, const SuiteOptions& opts = {});

}  // namespace qkm
