#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qkm/curve.hpp"
#include "qkm/series_jet.hpp"

namespace qkm {

/// Physical data of the quartic model: distinct eigenvalues E_k with
/// multiplicities r_k (not necessarily integer), matrix size N and coupling lambda.
struct ModelInput {
  std::vector<double> E;
  std::vector<double> r;
  double N = 0.0;
  double lambda = 0.0;

  /// N defaults to sum_k r_k.
  static ModelInput make(std::vector<double> E, std::vector<double> r, double lambda,
                         std::optional<double> N = std::nullopt);

  int size() const { return static_cast<int>(E.size()); }
  double coupling() const { return lambda / N; }
  /// max(1, max_k E_k); every tolerance in the library is relative to this.
  double scale() const;
  /// Throws InvalidInput naming the violated invariant.
  void validate() const;
};

struct SolveOptions {
  double tol = 1e-12;  // times scale
  int max_newton = 50;
  double min_homotopy_step = 1e-6;  // times lambda
};

struct SpectralData {
  ModelInput input;
  std::vector<double> eps;
  std::vector<double> rho;
  double residual_max = 0.0;
  double jacobian_condition = 1.0;
  int newton_iterations = 0;
  int homotopy_steps = 0;

  RationalR curve(CurveTolerances tol = {}) const;
};

struct Residuals {
  std::vector<double> f;
  std::vector<double> g;
  double max_abs() const;
};

/// f_l = eps_l - E_l - c sum_k rho_k/(eps_k+eps_l), g_l = 1 - r_l/rho_l + c sum_k rho_k/(eps_k+eps_l)^2.
Residuals residuals(const ModelInput& input, const std::vector<double>& eps, const std::vector<double>& rho);

/// Analytic Jacobian of (f, g) with respect to (eps_1..eps_d, rho_1..rho_d).
Eigen::MatrixXd jacobian(const ModelInput& input, const std::vector<double>& eps, const std::vector<double>& rho);

/// Positive-chamber solution by lambda-homotopy from (E, r) at lambda = 0.
SpectralData solve_spectral(const ModelInput& input, const SolveOptions& opts = {});

struct SpectralJets {
  std::vector<SeriesJet> eps;
  std::vector<SeriesJet> rho;
};

/// Order-by-order solution of f = g = 0 as power series in lambda, truncated at K <= 12.
SpectralJets series_spectral(const ModelInput& input, int K);

/// Upper bound (d+1)^d (2d+1)^d on the number of isolated complex solutions of
/// the cleared-denominator system at fixed lambda (affine Bezout). Documentation only.
double bezout_bound(int d);

}  // namespace qkm
